"""Gradient boosted trees on binary log-loss.

One engine serves both boosting presets: ``xgb`` grows each regression tree
level by level up to ``max_depth``; ``lgbm`` grows it leaf by leaf, always
expanding the leaf with the largest gain, up to ``max_leaves``.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ptsdpredict.errors import ConfigError, NonFiniteLoss
from ptsdpredict.learners.base import (
    Classifier,
    check_training_data,
    log_loss_from_logits,
    sigmoid,
)
from ptsdpredict.learners.tree import TreeBuilder, TreeStructure, candidate_positions, split_threshold

logger = logging.getLogger(__name__)

PRIOR_CLIP = 1e-6
MIN_GAIN = 1e-12
GROWTH_POLICIES = {"xgb": "level", "lgbm": "leaf"}


@dataclass(frozen=True)
class GbtHyper:
    preset: str = "xgb"
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: Optional[int] = 3
    max_leaves: Optional[int] = None
    reg_lambda: float = 1.0
    min_child_weight: float = 1e-3
    min_samples_leaf: int = 1


PRESETS = {
    "xgb": GbtHyper(preset="xgb", max_depth=3, max_leaves=None),
    "lgbm": GbtHyper(preset="lgbm", max_depth=None, max_leaves=15),
}


def gbt_preset(name: str, **overrides) -> GbtHyper:
    if name not in PRESETS:
        raise ConfigError(f"Unknown boosting preset {name!r}, expected one of {sorted(PRESETS)}")
    return replace(PRESETS[name], **overrides)


def leaf_weight(grad_sum, hess_sum, reg_lambda):
    """Newton step ``-G / (H + lambda)``."""
    return -grad_sum / (hess_sum + reg_lambda)


def split_gain(grad_left, hess_left, grad_total, hess_total, reg_lambda):
    grad_right = grad_total - grad_left
    hess_right = hess_total - hess_left
    return (
        grad_left ** 2 / (hess_left + reg_lambda)
        + grad_right ** 2 / (hess_right + reg_lambda)
        - grad_total ** 2 / (hess_total + reg_lambda)
    )


def best_gradient_split(X, grad, hess, hyper: GbtHyper):
    """
    Highest-gain split of one node, ties to the lower feature then threshold.

    Returns:
        tuple: (gain, feature, threshold), or None when no split gains.
    """
    best = None
    grad_total, hess_total = grad.sum(), hess.sum()
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="stable")
        values = X[order, feature]
        positions = candidate_positions(values, hyper.min_samples_leaf)
        if not positions.size:
            continue
        grad_left = np.cumsum(grad[order])[positions]
        hess_left = np.cumsum(hess[order])[positions]
        gain = split_gain(grad_left, hess_left, grad_total, hess_total, hyper.reg_lambda)
        allowed = (hess_left >= hyper.min_child_weight) & (
            hess_total - hess_left >= hyper.min_child_weight
        )
        gain = np.where(allowed, gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > MIN_GAIN and (best is None or gain[i] > best[0]):
            position = positions[i]
            best = (float(gain[i]), feature, split_threshold(values[position], values[position + 1]))
    return best


def grow_gradient_tree(X, grad, hess, hyper: GbtHyper) -> TreeStructure:
    """Regression tree on (gradient, hessian) with Newton leaf values."""
    policy = GROWTH_POLICIES[hyper.preset]
    builder = TreeBuilder()

    def candidate(node, rows, depth):
        if hyper.max_depth is not None and depth >= hyper.max_depth:
            return None
        split = best_gradient_split(X[rows], grad[rows], hess[rows], hyper)
        if split is None:
            return None
        return (split, node, rows, depth)

    def expand(entry):
        (_, feature, threshold), node, rows, depth = entry
        go_left = X[rows, feature] <= threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        left, right = builder.split(
            node,
            feature,
            threshold,
            leaf_weight(grad[left_rows].sum(), hess[left_rows].sum(), hyper.reg_lambda),
            left_rows.size,
            leaf_weight(grad[right_rows].sum(), hess[right_rows].sum(), hyper.reg_lambda),
            right_rows.size,
        )
        children = [candidate(left, left_rows, depth + 1), candidate(right, right_rows, depth + 1)]
        return [child for child in children if child is not None]

    rows = np.arange(grad.size)
    root = builder.add_leaf(leaf_weight(grad.sum(), hess.sum(), hyper.reg_lambda), grad.size)
    first = candidate(root, rows, 0)
    frontier = [first] if first is not None else []

    if policy == "level":
        while frontier:
            next_level = []
            for entry in frontier:
                next_level.extend(expand(entry))
            frontier = next_level
    else:
        max_leaves = hyper.max_leaves or 31
        n_leaves = 1
        while frontier and n_leaves < max_leaves:
            # Largest gain first, earliest node on ties
            best = max(range(len(frontier)), key=lambda i: (frontier[i][0][0], -frontier[i][1]))
            frontier.extend(expand(frontier.pop(best)))
            n_leaves += 1
    return builder.build()


class GbtModel(Classifier):
    """Boosted regression trees; probability is sigmoid(F0 + lr * sum of trees)."""

    kind = "gbt"
    hyper_class = GbtHyper

    def __init__(self, hyper: GbtHyper = None):
        super().__init__(hyper or GbtHyper())
        if self.hyper.preset not in GROWTH_POLICIES:
            raise ConfigError(f"Unknown boosting preset {self.hyper.preset!r}")
        self.kind = f"gbt_{self.hyper.preset}"
        self.initial_logit = 0.0
        self.trees = []
        self.loss_history = []

    def fit(self, X, y, seed: int = 0) -> "GbtModel":
        if self.hyper.n_rounds < 1:
            raise ConfigError(f"Boosting needs at least one round, got {self.hyper.n_rounds}")
        X, y = check_training_data(X, y)
        prior = float(np.clip(np.mean(y), PRIOR_CLIP, 1.0 - PRIOR_CLIP))
        self.initial_logit = float(np.log(prior / (1.0 - prior)))
        logits = np.full(y.size, self.initial_logit)
        self.trees = []
        self.loss_history = [log_loss_from_logits(logits, y)]

        with np.errstate(over="ignore", invalid="ignore"):
            for round_index in range(self.hyper.n_rounds):
                p = sigmoid(logits)
                grad = p - y
                hess = p * (1.0 - p)
                tree = grow_gradient_tree(X, grad, hess, self.hyper)
                logits = logits + self.hyper.learning_rate * tree.predict(X)
                loss = log_loss_from_logits(logits, y)
                if not np.isfinite(loss):
                    raise NonFiniteLoss(f"gradient boosting ({self.hyper.preset})", round_index)
                self.trees.append(tree)
                self.loss_history.append(loss)
        logger.debug(
            f"Boosted {len(self.trees)} rounds, train log-loss "
            f"{self.loss_history[0]:.4f} -> {self.loss_history[-1]:.4f}"
        )
        self.n_features_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        X = self._check_input(X)
        return self._logits(X)

    def _logits(self, X):
        logits = np.full(X.shape[0], self.initial_logit)
        for tree in self.trees:
            logits += self.hyper.learning_rate * tree.predict(X)
        return logits

    def _predict_proba(self, X):
        return sigmoid(self._logits(X))

    def _params_to_dict(self):
        return {
            "initial_logit": self.initial_logit,
            "trees": [tree.to_dict() for tree in self.trees],
            "loss_history": list(self.loss_history),
        }

    def _params_from_dict(self, document):
        self.initial_logit = float(document["initial_logit"])
        self.trees = [TreeStructure.from_dict(tree) for tree in document["trees"]]
        self.loss_history = list(document.get("loss_history", []))


def fit_gbt(X, y, hyper: GbtHyper = None, seed: int = 0) -> GbtModel:
    return GbtModel(hyper).fit(X, y, seed)
