from typing import Mapping

from ptsdpredict.errors import ConfigError, UnknownModel
from ptsdpredict.learners.base import Classifier, hyper_from_mapping, hyper_to_dict
from ptsdpredict.learners.forest import ForestHyper, ForestModel
from ptsdpredict.learners.gbt import PRESETS, GbtHyper, GbtModel
from ptsdpredict.learners.logistic import LogisticHyper, LogisticModel
from ptsdpredict.learners.mlp import MlpHyper, MlpModel
from ptsdpredict.learners.svm import LinearSvmModel, SvmHyper
from ptsdpredict.learners.tree import TreeHyper, TreeModel

MODEL_KINDS = {
    "logistic": (LogisticModel, LogisticHyper),
    "svm": (LinearSvmModel, SvmHyper),
    "tree": (TreeModel, TreeHyper),
    "forest": (ForestModel, ForestHyper),
    "gbt_xgb": (GbtModel, GbtHyper),
    "gbt_lgbm": (GbtModel, GbtHyper),
    "mlp": (MlpModel, MlpHyper),
}

DISPLAY_NAMES = {
    "logistic": "Logistic Regression",
    "svm": "SVM",
    "tree": "Decision Tree",
    "forest": "Random Forest",
    "gbt_xgb": "XGBoost",
    "gbt_lgbm": "LightGBM",
    "mlp": "Customized ANN",
    "ensemble": "Ensemble Model",
}


def check_kind(kind: str) -> str:
    if kind not in MODEL_KINDS:
        raise UnknownModel(kind)
    return kind


def build_hyper(kind: str, params: Mapping = None):
    """Hyperparameters for ``kind``: class defaults, boosting preset, then ``params``."""
    _, hyper_cls = MODEL_KINDS[check_kind(kind)]
    base = {}
    if hyper_cls is GbtHyper:
        base = hyper_to_dict(PRESETS[kind.split("_", 1)[1]])
        if params and params.get("preset", base["preset"]) != base["preset"]:
            raise ConfigError(f"Model kind {kind!r} fixes the boosting preset")
    base.update(params or {})
    return hyper_from_mapping(hyper_cls, base)


def build_classifier(kind: str, params: Mapping = None) -> Classifier:
    """Unfitted classifier of ``kind`` configured with ``params``."""
    model_cls, _ = MODEL_KINDS[check_kind(kind)]
    return model_cls(build_hyper(kind, params))


def model_from_dict(document) -> Classifier:
    """Rebuild any fitted model from its ``to_dict`` document."""
    if document.get("format") != "ptsdpredict.model":
        raise ConfigError(f"Not a model document: format {document.get('format')!r}")
    model_cls, _ = MODEL_KINDS[check_kind(document.get("kind"))]
    return model_cls.from_dict(document)
