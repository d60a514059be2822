from dataclasses import dataclass

import numpy as np

from ptsdpredict.errors import NonFiniteLoss
from ptsdpredict.learners.base import Classifier, check_training_data, sigmoid


@dataclass(frozen=True)
class LogisticHyper:
    learning_rate: float = 0.1
    epochs: int = 1000
    l2: float = 1e-4


def logistic_loss_and_grad(weights, bias, X, y, l2):
    """L2-regularised mean binary cross-entropy and its gradient."""
    logits = X @ weights + bias
    loss = np.mean(np.logaddexp(0.0, logits) - y * logits) + 0.5 * l2 * np.dot(weights, weights)
    residual = sigmoid(logits) - y
    grad_w = X.T @ residual / X.shape[0] + l2 * weights
    grad_b = np.mean(residual)
    return float(loss), grad_w, float(grad_b)


class LogisticModel(Classifier):
    """Logistic regression trained by full-batch gradient descent."""

    kind = "logistic"
    hyper_class = LogisticHyper

    def __init__(self, hyper: LogisticHyper = None):
        super().__init__(hyper or LogisticHyper())
        self.weights = None
        self.bias = 0.0
        self.loss_history = []

    def fit(self, X, y, seed: int = 0) -> "LogisticModel":
        # Zero initialisation; the fit is deterministic and ignores the seed
        X, y = check_training_data(X, y)
        weights = np.zeros(X.shape[1])
        bias = 0.0
        self.loss_history = []
        with np.errstate(over="ignore", invalid="ignore"):
            for epoch in range(self.hyper.epochs):
                loss, grad_w, grad_b = logistic_loss_and_grad(weights, bias, X, y, self.hyper.l2)
                if not np.isfinite(loss):
                    raise NonFiniteLoss("logistic regression", epoch)
                self.loss_history.append(loss)
                weights = weights - self.hyper.learning_rate * grad_w
                bias = bias - self.hyper.learning_rate * grad_b
            if not (np.all(np.isfinite(weights)) and np.isfinite(bias)):
                raise NonFiniteLoss("logistic regression", self.hyper.epochs)
        self.weights = weights
        self.bias = float(bias)
        self.n_features_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        X = self._check_input(X)
        return X @ self.weights + self.bias

    def _predict_proba(self, X):
        return sigmoid(X @ self.weights + self.bias)

    def _params_to_dict(self):
        return {"weights": self.weights.tolist(), "bias": self.bias}

    def _params_from_dict(self, document):
        self.weights = np.asarray(document["weights"], dtype=np.float64)
        self.bias = float(document["bias"])


def fit_logistic(X, y, hyper: LogisticHyper = None, seed: int = 0) -> LogisticModel:
    return LogisticModel(hyper).fit(X, y, seed)
