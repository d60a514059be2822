"""Most-frequent-category imputation for categorical feature columns."""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable

from ptsdpredict.errors import AllMissingColumn, UnknownColumn
from ptsdpredict.tabular.table import MISSING, Table


@dataclass(frozen=True)
class ImputerState:
    modes: Dict[str, str]

    def to_dict(self) -> dict:
        return {"modes": dict(self.modes)}

    @classmethod
    def from_dict(cls, document) -> "ImputerState":
        return cls(modes=dict(document["modes"]))


def column_mode(name, cells) -> str:
    counts = Counter(cell for cell in cells if cell is not MISSING)
    if not counts:
        raise AllMissingColumn(name)
    # Highest count wins; ties go to the lexicographically smallest category
    return min(counts.items(), key=lambda item: (-item[1], item[0]))[0]


def fit_imputer(table: Table, feature_columns: Iterable[str] = None) -> ImputerState:
    names = table.feature_columns if feature_columns is None else list(feature_columns)
    return ImputerState(modes={name: column_mode(name, table.column(name)) for name in names})


def apply_imputer(state: ImputerState, table: Table) -> Table:
    for name in table.feature_columns:
        if name not in state.modes:
            raise UnknownColumn(name)
    replacements = {
        name: [mode if cell is MISSING else cell for cell in table.column(name)]
        for name, mode in state.modes.items()
    }
    return table.with_columns(replacements)
