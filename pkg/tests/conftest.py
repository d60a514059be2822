import numpy as np
import pytest

from ptsdpredict.tabular import MISSING, ColumnKind, ColumnSchema, Schema, Table


def small_schema(features=("Disaster", "Shelter")) -> Schema:
    columns = [ColumnSchema(name) for name in features]
    columns.append(
        ColumnSchema("PTSD", kind=ColumnKind.BINARY_TARGET, allowed_missing=False, positive="Yes", negative="No")
    )
    return Schema(columns)


def make_table(rows, features=("Disaster", "Shelter")) -> Table:
    """Build a table from row lists; ``None`` cells become missing."""
    schema = small_schema(features)
    columns = {name: [] for name in schema.names}
    for row in rows:
        for name, cell in zip(schema.names, row):
            columns[name].append(MISSING if cell is None else cell)
    return Table(schema, columns)


def blobs(n_per_class=40, n_features=4, gap=3.0, seed=0):
    """Two Gaussian blobs, class 1 shifted by ``gap`` on every feature."""
    rng = np.random.default_rng(seed)
    X0 = rng.normal(0.0, 1.0, size=(n_per_class, n_features))
    X1 = rng.normal(gap, 1.0, size=(n_per_class, n_features))
    X = np.vstack([X0, X1])
    y = np.concatenate([np.zeros(n_per_class, dtype=np.int64), np.ones(n_per_class, dtype=np.int64)])
    return X, y


@pytest.fixture
def schema():
    return small_schema()


@pytest.fixture
def survey_table():
    """Twenty rows, 12 negative and 8 positive, a few missing feature cells."""
    disasters = ["flood", "cyclone", "earthquake", "flood"]
    shelters = ["yes", "no"]
    rows = []
    for i in range(20):
        label = "Yes" if i % 5 in (1, 3) else "No"
        disaster = None if i in (4, 11) else disasters[i % 4]
        shelter = None if i == 7 else shelters[(i // 2) % 2]
        rows.append([disaster, shelter, label])
    return make_table(rows)


@pytest.fixture
def separable():
    return blobs()
