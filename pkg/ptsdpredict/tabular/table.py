"""Dataset model: column schema, column-oriented table and feature matrix."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from ptsdpredict.errors import (
    DimensionMismatch,
    InvalidTargetCategory,
    LengthMismatch,
    MissingColumn,
    SchemaError,
)


class _MissingType:
    """Explicit marker for a missing cell."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MISSING"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_MissingType, ())


MISSING = _MissingType()

Cell = Union[str, _MissingType]


def is_missing(cell) -> bool:
    return cell is MISSING


class ColumnKind(Enum):
    CATEGORICAL = "categorical"
    BINARY_TARGET = "binary-target"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: ColumnKind = ColumnKind.CATEGORICAL
    allowed_missing: bool = True
    # Only meaningful for the target column
    positive: str = None
    negative: str = None

    def __post_init__(self):
        object.__setattr__(self, "name", self.name.strip())
        if not self.name:
            raise SchemaError("Column names must not be empty")
        if self.kind is ColumnKind.BINARY_TARGET:
            if not self.positive or not self.negative:
                raise SchemaError(
                    f"Target column {self.name!r} needs positive and negative categories"
                )
            if self.positive == self.negative:
                raise SchemaError(
                    f"Target column {self.name!r} uses the same text for both classes"
                )

    @property
    def is_target(self) -> bool:
        return self.kind is ColumnKind.BINARY_TARGET

    @classmethod
    def from_mapping(cls, entry: Mapping) -> "ColumnSchema":
        try:
            kind = ColumnKind(entry.get("kind", "categorical"))
        except ValueError:
            raise SchemaError(f"Unknown column kind {entry.get('kind')!r}")
        if "name" not in entry:
            raise SchemaError(f"Schema entry without a name: {dict(entry)}")
        return cls(
            name=str(entry["name"]),
            kind=kind,
            allowed_missing=bool(entry.get("allowed_missing", kind is not ColumnKind.BINARY_TARGET)),
            positive=None if entry.get("positive") is None else str(entry["positive"]),
            negative=None if entry.get("negative") is None else str(entry["negative"]),
        )

    def to_mapping(self) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind.value,
            "allowed_missing": self.allowed_missing,
        }
        if self.is_target:
            out["positive"] = self.positive
            out["negative"] = self.negative
        return out


class Schema:
    """Ordered list of columns with exactly one binary target."""

    def __init__(self, columns: Iterable[ColumnSchema]):
        self.columns: Tuple[ColumnSchema, ...] = tuple(columns)
        names = [c.name for c in self.columns]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise SchemaError(f"Duplicate column names after trimming: {duplicates}")
        targets = [c for c in self.columns if c.is_target]
        if len(targets) != 1:
            raise SchemaError(
                f"A schema needs exactly one binary-target column, found {len(targets)}"
            )
        self.target = targets[0]

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def feature_columns(self) -> List[str]:
        return [c.name for c in self.columns if not c.is_target]

    def __getitem__(self, name: str) -> ColumnSchema:
        for column in self.columns:
            if column.name == name:
                return column
        raise MissingColumn(name)

    def __iter__(self):
        return iter(self.columns)

    def __len__(self):
        return len(self.columns)

    def __eq__(self, other):
        return isinstance(other, Schema) and self.columns == other.columns

    @classmethod
    def from_mapping(cls, config: Mapping) -> "Schema":
        entries = config.get("columns") if isinstance(config, Mapping) else config
        if not entries:
            raise SchemaError("Schema lists no columns")
        return cls(ColumnSchema.from_mapping(entry) for entry in entries)

    def to_mapping(self) -> dict:
        return {"columns": [c.to_mapping() for c in self.columns]}


@dataclass(frozen=True)
class Table:
    """Column-oriented dataset. Cells are text or ``MISSING``."""

    schema: Schema
    columns: Dict[str, Tuple[Cell, ...]]
    n_rows: int = field(default=None)

    def __post_init__(self):
        columns = {name: tuple(self.columns[name]) for name in self.schema.names if name in self.columns}
        for name in self.schema.names:
            if name not in columns:
                raise MissingColumn(name)
        lengths = sorted({len(col) for col in columns.values()})
        if len(lengths) > 1:
            raise LengthMismatch(lengths[0], lengths[-1])
        n_rows = lengths[0]
        if self.n_rows is not None and self.n_rows != n_rows:
            raise LengthMismatch(self.n_rows, n_rows)
        target = self.schema.target
        allowed = {target.positive, target.negative}
        for cell in columns[target.name]:
            if cell is not MISSING and cell not in allowed:
                raise InvalidTargetCategory(target.name, cell)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "n_rows", n_rows)

    def column(self, name: str) -> Tuple[Cell, ...]:
        try:
            return self.columns[name]
        except KeyError:
            raise MissingColumn(name)

    @property
    def feature_columns(self) -> List[str]:
        return self.schema.feature_columns

    @property
    def target_column(self) -> str:
        return self.schema.target.name

    def take(self, rows: Sequence[int]) -> "Table":
        rows = list(rows)
        return Table(
            self.schema,
            {name: tuple(col[i] for i in rows) for name, col in self.columns.items()},
        )

    def with_columns(self, replacements: Mapping[str, Sequence[Cell]]) -> "Table":
        columns = dict(self.columns)
        for name, values in replacements.items():
            if name not in columns:
                raise MissingColumn(name)
            columns[name] = tuple(values)
        return Table(self.schema, columns)

    def drop_missing_target(self) -> Tuple["Table", int]:
        target = self.column(self.target_column)
        keep = [i for i, cell in enumerate(target) if cell is not MISSING]
        return self.take(keep), self.n_rows - len(keep)

    def labels(self) -> np.ndarray:
        """Binary label vector; 1 marks the positive (PTSD) category."""
        target = self.schema.target
        return np.array(
            [1 if cell == target.positive else 0 for cell in self.column(target.name)],
            dtype=np.int64,
        )

    def rows(self):
        names = self.schema.names
        for i in range(self.n_rows):
            yield [self.columns[name][i] for name in names]


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    feature_names: Tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatch("a 2-D matrix", f"{values.ndim}-D input")
        names = tuple(self.feature_names)
        if values.shape[1] != len(names):
            raise DimensionMismatch(len(names), values.shape[1])
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def take(self, rows) -> "FeatureMatrix":
        return FeatureMatrix(self.values[np.asarray(rows, dtype=np.int64)], self.feature_names)


def as_labels(labels, n_rows=None) -> np.ndarray:
    """Validate and return a {0, 1} label vector."""
    y = np.asarray(labels)
    if y.ndim != 1:
        raise DimensionMismatch("a 1-D label vector", f"{y.ndim}-D input")
    if y.size and not np.all((y == 0) | (y == 1)):
        raise InvalidTargetCategory("labels", sorted(set(np.unique(y).tolist()) - {0, 1}))
    if n_rows is not None and y.shape[0] != n_rows:
        raise LengthMismatch(n_rows, y.shape[0])
    return y.astype(np.int64)
