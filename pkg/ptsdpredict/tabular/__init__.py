from ptsdpredict.tabular.table import (
    MISSING,
    ColumnKind,
    ColumnSchema,
    FeatureMatrix,
    Schema,
    Table,
    as_labels,
    is_missing,
)
from ptsdpredict.tabular.csv_io import DEFAULT_MISSING_TOKENS, load_csv, table_to_csv, write_csv
from ptsdpredict.tabular.validation import ValidationReport, validate

__all__ = [
    "MISSING",
    "ColumnKind",
    "ColumnSchema",
    "FeatureMatrix",
    "Schema",
    "Table",
    "as_labels",
    "is_missing",
    "DEFAULT_MISSING_TOKENS",
    "load_csv",
    "table_to_csv",
    "write_csv",
    "ValidationReport",
    "validate",
]
