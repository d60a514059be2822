from ptsdpredict.learners.base import DEFAULT_THRESHOLD, Classifier, predict
from ptsdpredict.learners.forest import ForestHyper, ForestModel, fit_forest
from ptsdpredict.learners.gbt import GbtHyper, GbtModel, fit_gbt, gbt_preset
from ptsdpredict.learners.history import HISTORY_HEADER, EpochRecord, TrainingHistory
from ptsdpredict.learners.logistic import LogisticHyper, LogisticModel, fit_logistic
from ptsdpredict.learners.mlp import MlpHyper, MlpModel, fit_mlp, mlp_backward, mlp_forward
from ptsdpredict.learners.registry import (
    DISPLAY_NAMES,
    MODEL_KINDS,
    build_classifier,
    build_hyper,
    model_from_dict,
)
from ptsdpredict.learners.svm import LinearSvmModel, SvmHyper, fit_linear_svm
from ptsdpredict.learners.tree import TreeHyper, TreeModel, fit_tree
