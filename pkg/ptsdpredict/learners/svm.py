from dataclasses import dataclass

import numpy as np

from ptsdpredict.errors import NonFiniteLoss
from ptsdpredict.learners.base import Classifier, check_training_data, sigmoid


@dataclass(frozen=True)
class SvmHyper:
    learning_rate: float = 0.01
    epochs: int = 1000
    C: float = 10.0
    platt_iterations: int = 100


def hinge_objective_and_grad(weights, bias, X, signs, C):
    """0.5 * ||w||^2 + C * mean(hinge) and its sub-gradient.

    ``signs`` are the labels mapped to -1/+1.
    """
    margins = signs * (X @ weights + bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    objective = 0.5 * np.dot(weights, weights) + C * np.mean(hinge)
    active = (margins < 1.0).astype(np.float64)
    coeff = -C * active * signs / X.shape[0]
    grad_w = weights + X.T @ coeff
    grad_b = float(np.sum(coeff))
    return float(objective), grad_w, grad_b


def fit_platt(decision_values, y, max_iter: int = 100):
    """
    Fit ``p = sigmoid(A * f + B)`` on decision values by Newton's method.

    Targets are Platt's smoothed labels (N+ + 1)/(N+ + 2) and 1/(N- + 2).

    Returns:
        tuple: (A, B)
    """
    f = np.asarray(decision_values, dtype=np.float64)
    n_pos = float(np.sum(y == 1))
    n_neg = float(np.sum(y == 0))
    targets = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def objective(a, b):
        z = a * f + b
        return float(np.sum(np.logaddexp(0.0, z) - targets * z))

    a, b = 0.0, float(np.log((n_pos + 1.0) / (n_neg + 1.0)))
    current = objective(a, b)
    for _ in range(max_iter):
        p = sigmoid(a * f + b)
        residual = p - targets
        gradient = np.array([np.dot(residual, f), np.sum(residual)])
        if np.max(np.abs(gradient)) < 1e-10:
            break
        weights = p * (1.0 - p)
        hessian = np.array(
            [
                [np.dot(weights, f * f) + 1e-12, np.dot(weights, f)],
                [np.dot(weights, f), np.sum(weights) + 1e-12],
            ]
        )
        step = np.linalg.solve(hessian, gradient)
        # Backtracking keeps every accepted step a descent step
        scale = 1.0
        while scale > 1e-10:
            candidate = objective(a - scale * step[0], b - scale * step[1])
            if candidate <= current + 1e-4 * scale * np.dot(gradient, -step):
                break
            scale *= 0.5
        else:
            break
        a, b = a - scale * step[0], b - scale * step[1]
        current = candidate
    return float(a), float(b)


class LinearSvmModel(Classifier):
    """Linear SVM (sub-gradient descent on hinge loss) with Platt calibration."""

    kind = "svm"
    hyper_class = SvmHyper

    def __init__(self, hyper: SvmHyper = None):
        super().__init__(hyper or SvmHyper())
        self.weights = None
        self.bias = 0.0
        self.platt_a = 1.0
        self.platt_b = 0.0

    def fit(self, X, y, seed: int = 0) -> "LinearSvmModel":
        X, y = check_training_data(X, y)
        signs = np.where(y == 1, 1.0, -1.0)
        weights = np.zeros(X.shape[1])
        bias = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for epoch in range(self.hyper.epochs):
                objective, grad_w, grad_b = hinge_objective_and_grad(
                    weights, bias, X, signs, self.hyper.C
                )
                if not np.isfinite(objective):
                    raise NonFiniteLoss("linear SVM", epoch)
                weights = weights - self.hyper.learning_rate * grad_w
                bias = bias - self.hyper.learning_rate * grad_b
            if not (np.all(np.isfinite(weights)) and np.isfinite(bias)):
                raise NonFiniteLoss("linear SVM", self.hyper.epochs)

        self.weights = weights
        self.bias = float(bias)
        self.platt_a, self.platt_b = fit_platt(
            X @ weights + bias, y, max_iter=self.hyper.platt_iterations
        )
        self.n_features_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        X = self._check_input(X)
        return X @ self.weights + self.bias

    def calibrate(self, decision_values) -> np.ndarray:
        return sigmoid(self.platt_a * np.asarray(decision_values) + self.platt_b)

    def _predict_proba(self, X):
        return self.calibrate(X @ self.weights + self.bias)

    def _params_to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
        }

    def _params_from_dict(self, document):
        self.weights = np.asarray(document["weights"], dtype=np.float64)
        self.bias = float(document["bias"])
        self.platt_a = float(document["platt_a"])
        self.platt_b = float(document["platt_b"])


def fit_linear_svm(X, y, hyper: SvmHyper = None, seed: int = 0) -> LinearSvmModel:
    return LinearSvmModel(hyper).fit(X, y, seed)
