from ptsdpredict.preprocess.encoder import LabelEncoder, encode, fit_encoder
from ptsdpredict.preprocess.imputer import ImputerState, apply_imputer, fit_imputer
from ptsdpredict.preprocess.pipeline import FittedPreprocessor, PreparedData, fit_transform_split
from ptsdpredict.preprocess.scaler import EPSILON, ScalerParams, apply_scaler, fit_scaler
from ptsdpredict.preprocess.smote import knn_minority, smote_oversample, synthesize
from ptsdpredict.preprocess.split import SplitIndices, stratified_split

__all__ = [
    "LabelEncoder",
    "encode",
    "fit_encoder",
    "ImputerState",
    "apply_imputer",
    "fit_imputer",
    "FittedPreprocessor",
    "PreparedData",
    "fit_transform_split",
    "EPSILON",
    "ScalerParams",
    "apply_scaler",
    "fit_scaler",
    "knn_minority",
    "smote_oversample",
    "synthesize",
    "SplitIndices",
    "stratified_split",
]
