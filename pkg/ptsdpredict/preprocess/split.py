import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ptsdpredict.errors import DegenerateSplit
from ptsdpredict.tabular.table import as_labels


@dataclass(frozen=True)
class SplitIndices:
    train_rows: Tuple[int, ...]
    test_rows: Tuple[int, ...]
    seed: int
    test_fraction: float = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "train_rows": list(self.train_rows),
            "test_rows": list(self.test_rows),
        }

    @classmethod
    def from_dict(cls, document) -> "SplitIndices":
        return cls(
            train_rows=tuple(document["train_rows"]),
            test_rows=tuple(document["test_rows"]),
            seed=document["seed"],
            test_fraction=document.get("test_fraction"),
        )


def allocate_test_slots(class_counts: Dict[int, int], test_fraction: float) -> Dict[int, int]:
    """Largest-remainder allocation of test slots per class.

    Each class receives floor(n_c * f) slots; the slots still missing to reach
    round(n * f) go to the classes with the largest fractional remainders
    (ties to the lower class label).
    """
    total = sum(class_counts.values())
    target = int(math.floor(total * test_fraction + 0.5))
    quotas = {c: n * test_fraction for c, n in class_counts.items()}
    slots = {c: min(int(math.floor(q)), class_counts[c]) for c, q in quotas.items()}
    remaining = target - sum(slots.values())
    by_remainder = sorted(quotas, key=lambda c: (-(quotas[c] - math.floor(quotas[c])), c))
    for c in by_remainder:
        if remaining <= 0:
            break
        if slots[c] < class_counts[c]:
            slots[c] += 1
            remaining -= 1
    return slots


def stratified_split(labels, test_fraction: float, seed: int) -> SplitIndices:
    """
    Stratified, seeded train/test partition of row indices.

    Args:
        labels: binary label vector.
        test_fraction (float): fraction of rows in the test split, in (0, 1).
        seed (int): seed of the within-class shuffle.

    Returns:
        SplitIndices: sorted, disjoint train and test row indices.

    Raises:
        DegenerateSplit: a class is absent or either split would be empty.
    """
    y = as_labels(labels)
    if not 0.0 < test_fraction < 1.0:
        raise DegenerateSplit(f"test_fraction must lie in (0, 1), got {test_fraction}")

    class_rows = {c: np.flatnonzero(y == c) for c in (0, 1)}
    empty = [c for c, rows in class_rows.items() if rows.size == 0]
    if empty:
        raise DegenerateSplit(f"Class {empty[0]} has no members")

    slots = allocate_test_slots({c: rows.size for c, rows in class_rows.items()}, test_fraction)
    rng = np.random.default_rng(seed)
    test_rows = []
    for c in (0, 1):
        shuffled = rng.permutation(class_rows[c])
        test_rows.extend(shuffled[: slots[c]].tolist())

    test_set = set(test_rows)
    train_rows = [i for i in range(y.size) if i not in test_set]
    if not test_rows or not train_rows:
        raise DegenerateSplit(
            f"Split of {y.size} rows at fraction {test_fraction} leaves an empty side"
        )
    return SplitIndices(
        train_rows=tuple(train_rows),
        test_rows=tuple(sorted(test_rows)),
        seed=seed,
        test_fraction=test_fraction,
    )
