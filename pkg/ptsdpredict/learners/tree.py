"""Binary decision trees stored as flat node arrays.

``TreeStructure`` is shared by the CART classifier below and by the gradient
boosted regression trees in ``gbt``. A sample goes left when its feature value
is ``<=`` the node threshold.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ptsdpredict.learners.base import Classifier, check_training_data

LEAF = -1


class TreeBuilder:
    """Mutable node store used while a tree grows."""

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.n_samples = []

    def add_leaf(self, value: float, n_samples: int) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(value))
        self.n_samples.append(int(n_samples))
        return len(self.feature) - 1

    def split(self, node, feature, threshold, left_value, n_left, right_value, n_right):
        """Turn leaf ``node`` into an internal node with two fresh leaves."""
        left = self.add_leaf(left_value, n_left)
        right = self.add_leaf(right_value, n_right)
        self.feature[node] = int(feature)
        self.threshold[node] = float(threshold)
        self.left[node] = left
        self.right[node] = right
        return left, right

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f == LEAF)

    def build(self) -> "TreeStructure":
        return TreeStructure(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
            n_samples=np.asarray(self.n_samples, dtype=np.int64),
        )


@dataclass(frozen=True)
class TreeStructure:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        # Children always have larger ids than their parent
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max()) if self.n_nodes else 0

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while rows.size:
            current = node[rows]
            feature = self.feature[current]
            internal = feature != LEAF
            rows, current, feature = rows[internal], current[internal], feature[internal]
            if not rows.size:
                break
            go_left = X[rows, feature] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self, node: int = 0) -> dict:
        """Nested-node form of the subtree rooted at ``node``."""
        if self.feature[node] == LEAF:
            return {"value": float(self.value[node]), "n_samples": int(self.n_samples[node])}
        return {
            "feature": int(self.feature[node]),
            "threshold": float(self.threshold[node]),
            "n_samples": int(self.n_samples[node]),
            "value": float(self.value[node]),
            "left": self.to_dict(int(self.left[node])),
            "right": self.to_dict(int(self.right[node])),
        }

    @classmethod
    def from_dict(cls, document) -> "TreeStructure":
        builder = TreeBuilder()
        root = builder.add_leaf(document["value"], document["n_samples"])
        stack = [(root, document)]
        while stack:
            node, nested = stack.pop()
            if "feature" not in nested:
                continue
            left, right = builder.split(
                node,
                nested["feature"],
                nested["threshold"],
                nested["left"]["value"],
                nested["left"]["n_samples"],
                nested["right"]["value"],
                nested["right"]["n_samples"],
            )
            stack.append((right, nested["right"]))
            stack.append((left, nested["left"]))
        return builder.build()


def gini_impurity(n_positive, n_total):
    """Binary Gini impurity ``2 p (1 - p)``; an empty node is pure."""
    n_total = np.asarray(n_total, dtype=np.float64)
    p = np.divide(n_positive, n_total, out=np.zeros_like(n_total), where=n_total > 0)
    return 2.0 * p * (1.0 - p)


def weighted_gini(left_labels, right_labels) -> float:
    """Size-weighted Gini impurity of a two-way partition."""
    left_labels = np.asarray(left_labels)
    right_labels = np.asarray(right_labels)
    n_left, n_right = left_labels.size, right_labels.size
    total = n_left + n_right
    left = gini_impurity(np.sum(left_labels == 1), n_left)
    right = gini_impurity(np.sum(right_labels == 1), n_right)
    return float((n_left * left + n_right * right) / total)


def split_threshold(lower: float, upper: float) -> float:
    """Midpoint of two consecutive distinct values, kept strictly below ``upper``."""
    middle = lower + (upper - lower) / 2.0
    if middle >= upper:
        return lower
    return middle


def candidate_positions(sorted_values: np.ndarray, min_samples_leaf: int) -> np.ndarray:
    """Indices ``i`` where a split between sorted rows i and i+1 is allowed."""
    n = sorted_values.size
    positions = np.nonzero(sorted_values[:-1] < sorted_values[1:])[0]
    n_left = positions + 1
    keep = (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
    return positions[keep]


def best_gini_split(X, y, features, min_samples_leaf: int = 1):
    """
    Lowest weighted-Gini split over ``features``.

    Ties go to the lower feature index, then the lower threshold.

    Returns:
        tuple: (impurity, feature, threshold), or None when no feature splits.
    """
    best = None
    n = y.size
    for feature in sorted(int(f) for f in features):
        order = np.argsort(X[:, feature], kind="stable")
        values = X[order, feature]
        positions = candidate_positions(values, min_samples_leaf)
        if not positions.size:
            continue
        positives = np.cumsum(y[order])
        n_left = positions + 1
        left_pos = positives[positions]
        right_pos = positives[-1] - left_pos
        impurity = (
            n_left * gini_impurity(left_pos, n_left)
            + (n - n_left) * gini_impurity(right_pos, n - n_left)
        ) / n
        i = int(np.argmin(impurity))
        if best is None or impurity[i] < best[0]:
            position = positions[i]
            threshold = split_threshold(values[position], values[position + 1])
            best = (float(impurity[i]), feature, threshold)
    return best


@dataclass(frozen=True)
class TreeHyper:
    max_depth: Optional[int] = 12
    min_samples_leaf: int = 1
    max_features: Optional[int] = None


def grow_classification_tree(X, y, hyper: TreeHyper, rng=None) -> TreeStructure:
    """Greedy CART growth, depth first, with leaf class-1 frequencies."""
    n_features = X.shape[1]
    max_features = hyper.max_features
    subsample = max_features is not None and max_features < n_features
    if subsample and rng is None:
        raise ValueError("Feature subsampling needs a random generator")

    builder = TreeBuilder()
    root_rows = np.arange(y.size)
    root = builder.add_leaf(np.mean(y), y.size)
    stack = [(root, root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        labels = y[rows]
        n_pos = int(labels.sum())
        if n_pos in (0, labels.size):
            continue
        if hyper.max_depth is not None and depth >= hyper.max_depth:
            continue
        if labels.size < 2 * hyper.min_samples_leaf:
            continue

        X_node = X[rows]
        if subsample:
            drawn = rng.choice(n_features, size=max_features, replace=False)
            split = best_gini_split(X_node, labels, drawn, hyper.min_samples_leaf)
            if split is None:
                rest = np.setdiff1d(np.arange(n_features), drawn)
                split = best_gini_split(X_node, labels, rest, hyper.min_samples_leaf)
        else:
            split = best_gini_split(X_node, labels, range(n_features), hyper.min_samples_leaf)
        if split is None:
            continue

        _, feature, threshold = split
        go_left = X_node[:, feature] <= threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        left, right = builder.split(
            node,
            feature,
            threshold,
            np.mean(y[left_rows]),
            left_rows.size,
            np.mean(y[right_rows]),
            right_rows.size,
        )
        stack.append((right, right_rows, depth + 1))
        stack.append((left, left_rows, depth + 1))
    return builder.build()


class TreeModel(Classifier):
    """CART decision tree with Gini impurity."""

    kind = "tree"
    hyper_class = TreeHyper

    def __init__(self, hyper: TreeHyper = None):
        super().__init__(hyper or TreeHyper())
        self.tree = None

    def fit(self, X, y, seed: int = 0) -> "TreeModel":
        X, y = check_training_data(X, y)
        rng = np.random.default_rng(seed)
        self.tree = grow_classification_tree(X, y, self.hyper, rng)
        self.n_features_ = X.shape[1]
        return self

    def _predict_proba(self, X):
        return self.tree.predict(X)

    def _params_to_dict(self):
        return {"tree": self.tree.to_dict()}

    def _params_from_dict(self, document):
        self.tree = TreeStructure.from_dict(document["tree"])


def fit_tree(X, y, hyper: TreeHyper = None, seed: int = 0) -> TreeModel:
    return TreeModel(hyper).fit(X, y, seed)
