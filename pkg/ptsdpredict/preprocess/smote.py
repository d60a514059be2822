"""SMOTE oversampling of the minority class.

Synthetic points are convex combinations ``x_i + lam * (x_n - x_i)`` of a
minority point ``x_i`` and one of its ``k`` nearest minority neighbours
``x_n``. All random draws are taken up front from one seeded generator, so the
output does not depend on how the neighbour search is parallelised.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from joblib import Parallel, delayed

from ptsdpredict.errors import ConfigError, TooFewMinority
from ptsdpredict.tabular.table import FeatureMatrix, as_labels

logger = logging.getLogger(__name__)

DEFAULT_K = 5

LambdaSampler = Callable[[np.random.Generator, int], np.ndarray]


def knn_minority(points, query_index: int, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest points to ``points[query_index]``.

    Euclidean distance, the query itself excluded, ties to the lower index.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1 or n < k + 1:
        raise ValueError(f"knn_minority needs at least k + 1 = {k + 1} points, got {n}")
    distances = np.sum((points - points[query_index]) ** 2, axis=1)
    order = np.lexsort((np.arange(n), distances))
    order = order[order != query_index]
    return order[:k]


def neighbour_table(points, k: int, n_jobs: int = 1) -> np.ndarray:
    n = len(points)
    if n_jobs == 1:
        rows = [knn_minority(points, i, k) for i in range(n)]
    else:
        rows = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(knn_minority)(points, i, k) for i in range(n)
        )
    return np.vstack(rows).astype(np.int64) if rows else np.empty((0, k), dtype=np.int64)


@dataclass(frozen=True)
class SyntheticBatch:
    points: np.ndarray
    base_index: np.ndarray
    neighbour_index: np.ndarray
    lam: np.ndarray


def synthesize(
    minority_points,
    n_synthetic: int,
    k: int,
    seed: int,
    lambda_sampler: Optional[LambdaSampler] = None,
    n_jobs: int = 1,
) -> SyntheticBatch:
    """
    Generate ``n_synthetic`` points from the minority points.

    Args:
        minority_points: (m, d) matrix of minority samples, m > k.
        n_synthetic (int): number of points to generate.
        k (int): neighbourhood size.
        seed (int): seed of the generator driving base, neighbour and lambda draws.
        lambda_sampler: optional ``(rng, size) -> lambdas`` hook replacing the
            uniform draw, used to force interpolation weights.
        n_jobs (int): threads for the neighbour search.
    """
    points = np.asarray(minority_points, dtype=np.float64)
    neighbours = neighbour_table(points, k, n_jobs=n_jobs)

    rng = np.random.default_rng(seed)
    base = rng.integers(0, points.shape[0], size=n_synthetic)
    pick = rng.integers(0, k, size=n_synthetic)
    if lambda_sampler is None:
        lam = rng.random(n_synthetic)
    else:
        lam = np.asarray(lambda_sampler(rng, n_synthetic), dtype=np.float64)

    neighbour = neighbours[base, pick] if n_synthetic else np.empty(0, dtype=np.int64)
    origin = points[base]
    synthetic = origin + lam[:, None] * (points[neighbour] - origin)
    return SyntheticBatch(points=synthetic, base_index=base, neighbour_index=neighbour, lam=lam)


def smote_oversample(
    features,
    labels,
    k: int = DEFAULT_K,
    seed: int = 0,
    lambda_sampler: Optional[LambdaSampler] = None,
    n_jobs: int = 1,
):
    """
    Balance a training set by adding synthetic minority rows.

    The original rows come first, in their original order; synthetic rows are
    appended with the minority label. Balanced input is returned unchanged.

    Args:
        features: ``FeatureMatrix`` or (n, d) array of the training split.
        labels: binary labels of the training split.
        k (int): nearest minority neighbours, clamped to minority count - 1.
        seed (int): generator seed.
        lambda_sampler: optional interpolation-weight hook (see ``synthesize``).
        n_jobs (int): threads for the neighbour search.

    Returns:
        tuple: (features, labels) of the same types as the inputs.

    Raises:
        TooFewMinority: the minority class has fewer than 2 samples.
    """
    if k < 1:
        raise ConfigError(f"SMOTE k must be at least 1, got {k}")
    is_matrix = isinstance(features, FeatureMatrix)
    X = features.values if is_matrix else np.asarray(features, dtype=np.float64)
    y = as_labels(labels, n_rows=X.shape[0])

    counts = np.bincount(y, minlength=2)
    if counts[0] == counts[1]:
        return features, y.copy()

    minority = int(np.argmin(counts))
    n_minority, n_majority = int(counts[minority]), int(counts[1 - minority])
    if n_minority < 2:
        raise TooFewMinority(n_minority)
    if k > n_minority - 1:
        logger.warning(
            f"SMOTE k={k} exceeds minority count - 1; clamping to {n_minority - 1}"
        )
        k = n_minority - 1

    minority_points = X[y == minority]
    batch = synthesize(
        minority_points,
        n_majority - n_minority,
        k,
        seed,
        lambda_sampler=lambda_sampler,
        n_jobs=n_jobs,
    )
    logger.debug(
        f"SMOTE added {batch.points.shape[0]} synthetic rows to class {minority} (k={k})"
    )

    X_out = np.vstack([X, batch.points])
    y_out = np.concatenate([y, np.full(batch.points.shape[0], minority, dtype=np.int64)])
    if is_matrix:
        return FeatureMatrix(X_out, features.feature_names), y_out
    return X_out, y_out
