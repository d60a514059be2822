from collections import Counter
from dataclasses import asdict, dataclass
from typing import Dict

from ptsdpredict.errors import TargetMissingEntries, UnexpectedMissing
from ptsdpredict.tabular.table import MISSING, Table


@dataclass(frozen=True)
class ValidationReport:
    n_rows: int
    missing_counts: Dict[str, int]
    distinct_counts: Dict[str, int]
    target_counts: Dict[str, int]

    def to_dict(self) -> dict:
        return asdict(self)


def validate(table: Table) -> ValidationReport:
    """
    Summarise a table without modifying it.

    Raises:
        TargetMissingEntries: the target column holds missing cells. Target
            rows are never imputed.
        UnexpectedMissing: a feature column declared with
            ``allowed_missing: false`` holds missing cells.
    """
    missing_counts = {}
    distinct_counts = {}
    for name in table.schema.names:
        column = table.column(name)
        observed = [cell for cell in column if cell is not MISSING]
        missing_counts[name] = len(column) - len(observed)
        distinct_counts[name] = len(set(observed))

    target = table.schema.target
    if missing_counts[target.name]:
        raise TargetMissingEntries(target.name, missing_counts[target.name])
    for column in table.schema:
        if not column.is_target and not column.allowed_missing and missing_counts[column.name]:
            raise UnexpectedMissing(column.name, missing_counts[column.name])

    counts = Counter(table.column(target.name))
    target_counts = {
        target.negative: counts.get(target.negative, 0),
        target.positive: counts.get(target.positive, 0),
    }
    return ValidationReport(
        n_rows=table.n_rows,
        missing_counts=missing_counts,
        distinct_counts=distinct_counts,
        target_counts=target_counts,
    )
