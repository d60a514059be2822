from dataclasses import dataclass

import numpy as np

from ptsdpredict.errors import DimensionMismatch
from ptsdpredict.tabular.table import FeatureMatrix

EPSILON = 1e-12


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    # Population standard deviation
    std: np.ndarray

    @property
    def scale(self) -> np.ndarray:
        return np.maximum(self.std, EPSILON)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, document) -> "ScalerParams":
        return cls(
            mean=np.asarray(document["mean"], dtype=np.float64),
            std=np.asarray(document["std"], dtype=np.float64),
        )


def _values(features):
    if isinstance(features, FeatureMatrix):
        return features.values
    values = np.asarray(features, dtype=np.float64)
    if values.ndim != 2:
        raise DimensionMismatch("a 2-D matrix", f"{values.ndim}-D input")
    return values


def fit_scaler(features) -> ScalerParams:
    values = _values(features)
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    if values.shape[0]:
        # Constant columns keep their exact value so they scale to exactly 0
        constant = np.ptp(values, axis=0) == 0
        mean = np.where(constant, values[0], mean)
        std = np.where(constant, 0.0, std)
    return ScalerParams(mean=mean, std=std)


def apply_scaler(params: ScalerParams, features):
    values = _values(features)
    if values.shape[1] != params.mean.shape[0]:
        raise DimensionMismatch(params.mean.shape[0], values.shape[1])
    scaled = (values - params.mean) / params.scale
    if isinstance(features, FeatureMatrix):
        return FeatureMatrix(scaled, features.feature_names)
    return scaled
