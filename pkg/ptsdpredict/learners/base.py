"""The uniform classifier contract and shared numerical helpers."""

import logging
from abc import ABC, abstractmethod
from dataclasses import asdict, fields
from typing import Mapping

import numpy as np

from ptsdpredict.errors import ConfigError, DimensionMismatch
from ptsdpredict.tabular.table import FeatureMatrix, as_labels

FORMAT_VERSION = 1
DEFAULT_THRESHOLD = 0.5

logger = logging.getLogger(__name__)


def sigmoid(z):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def log_loss_from_logits(logits, y) -> float:
    """Mean binary cross-entropy computed from logits."""
    logits = np.asarray(logits, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def as_matrix(X) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        return X.values
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("a 2-D matrix", f"{X.ndim}-D input")
    return X


def check_training_data(X, y):
    X = as_matrix(X)
    y = as_labels(y, n_rows=X.shape[0])
    if X.shape[0] == 0:
        raise DimensionMismatch("at least one row", "0 rows")
    return X, y


def hyper_from_mapping(hyper_cls, params: Mapping = None, **overrides):
    """Build a hyperparameter dataclass, rejecting unknown keys."""
    params = dict(params or {})
    params.update(overrides)
    known = {f.name for f in fields(hyper_cls)}
    unknown = sorted(set(params) - known)
    if unknown:
        raise ConfigError(f"Unknown {hyper_cls.__name__} parameters: {unknown}")
    for key, value in list(params.items()):
        if isinstance(value, list):
            params[key] = tuple(value)
    return hyper_cls(**params)


def hyper_to_dict(hyper) -> dict:
    out = asdict(hyper)
    return {key: list(value) if isinstance(value, tuple) else value for key, value in out.items()}


class Classifier(ABC):
    """Fit on (features, labels); return the class-1 probability per row."""

    kind = None
    hyper_class = None

    def __init__(self, hyper):
        self.hyper = hyper
        self.n_features_ = None

    @abstractmethod
    def fit(self, X, y, seed: int = 0) -> "Classifier":
        """Fit in place and return ``self``. Pure function of (X, y, hyper, seed)."""

    @abstractmethod
    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Class-1 probabilities for a validated matrix."""

    @abstractmethod
    def _params_to_dict(self) -> dict:
        """Fitted parameters as JSON-ready data."""

    @abstractmethod
    def _params_from_dict(self, document: dict):
        """Restore fitted parameters written by ``_params_to_dict``."""

    @property
    def is_fitted(self) -> bool:
        return self.n_features_ is not None

    def _check_input(self, X) -> np.ndarray:
        if not self.is_fitted:
            raise ConfigError(f"{type(self).__name__} is not fitted")
        X = as_matrix(X)
        if X.shape[1] != self.n_features_:
            raise DimensionMismatch(self.n_features_, X.shape[1])
        return X

    def predict_proba(self, X) -> np.ndarray:
        X = self._check_input(X)
        with np.errstate(over="ignore", invalid="ignore"):
            proba = np.asarray(self._predict_proba(X), dtype=np.float64)
        undefined = np.isnan(proba)
        if undefined.any():
            logger.warning(f"{type(self).__name__} gave {int(undefined.sum())} undefined probabilities, using 0.5")
        return np.clip(np.nan_to_num(proba, nan=0.5), 0.0, 1.0)

    def predict(self, X, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "format": "ptsdpredict.model",
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "hyper": hyper_to_dict(self.hyper),
            "n_features": self.n_features_,
            "params": self._params_to_dict(),
        }

    @classmethod
    def from_dict(cls, document) -> "Classifier":
        if document.get("version") != FORMAT_VERSION:
            raise ConfigError(f"Unsupported model version {document.get('version')!r}")
        model = cls(hyper_from_mapping(cls.hyper_class, document["hyper"]))
        model.n_features_ = document["n_features"]
        model._params_from_dict(document["params"])
        return model


def predict(model: Classifier, X, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Label 1 exactly where the model probability is at least ``threshold``."""
    return model.predict(X, threshold)
