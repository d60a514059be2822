import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from joblib import Parallel, delayed

from ptsdpredict.errors import ConfigError
from ptsdpredict.learners.base import Classifier, check_training_data
from ptsdpredict.learners.tree import TreeHyper, TreeStructure, grow_classification_tree
from ptsdpredict.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForestHyper:
    n_trees: int = 100
    max_features: Union[str, int, None] = "sqrt"
    max_depth: Optional[int] = 12
    min_samples_leaf: int = 1
    bootstrap: bool = True
    n_jobs: int = 1


def resolve_max_features(max_features, n_features: int) -> int:
    """Number of features drawn per split: "sqrt" is ceil(sqrt(d)), None or "all" is d."""
    if max_features is None or max_features == "all":
        return n_features
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    if isinstance(max_features, int) and 1 <= max_features:
        return min(max_features, n_features)
    raise ConfigError(f"Invalid max_features: {max_features!r}")


def _grow_member(X, y, tree_hyper, bootstrap, tree_seed):
    rng = np.random.default_rng(tree_seed)
    if bootstrap:
        rows = rng.integers(0, y.size, size=y.size)
        X, y = X[rows], y[rows]
    return grow_classification_tree(X, y, tree_hyper, rng)


class ForestModel(Classifier):
    """Random forest: bootstrap trees with per-split feature subsampling."""

    kind = "forest"
    hyper_class = ForestHyper

    def __init__(self, hyper: ForestHyper = None):
        super().__init__(hyper or ForestHyper())
        self.trees = []
        self.tree_seeds = []

    def fit(self, X, y, seed: int = 0) -> "ForestModel":
        if self.hyper.n_trees < 1:
            raise ConfigError(f"A forest needs at least one tree, got {self.hyper.n_trees}")
        X, y = check_training_data(X, y)
        tree_hyper = TreeHyper(
            max_depth=self.hyper.max_depth,
            min_samples_leaf=self.hyper.min_samples_leaf,
            max_features=resolve_max_features(self.hyper.max_features, X.shape[1]),
        )
        self.tree_seeds = [derive_seed(seed, index) for index in range(self.hyper.n_trees)]
        # Each tree owns its RNG stream, so the thread count cannot change the result
        self.trees = Parallel(n_jobs=self.hyper.n_jobs, prefer="threads")(
            delayed(_grow_member)(X, y, tree_hyper, self.hyper.bootstrap, tree_seed)
            for tree_seed in self.tree_seeds
        )
        logger.debug(f"Grew {len(self.trees)} trees with {tree_hyper.max_features} features per split")
        self.n_features_ = X.shape[1]
        return self

    def _predict_proba(self, X):
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)

    def _params_to_dict(self):
        return {
            "tree_seeds": list(self.tree_seeds),
            "trees": [tree.to_dict() for tree in self.trees],
        }

    def _params_from_dict(self, document):
        self.tree_seeds = list(document["tree_seeds"])
        self.trees = [TreeStructure.from_dict(tree) for tree in document["trees"]]


def fit_forest(X, y, hyper: ForestHyper = None, seed: int = 0) -> ForestModel:
    return ForestModel(hyper).fit(X, y, seed)
