"""CSV ingestion and canonical CSV writing for ``Table``."""

import logging
import re
from pathlib import Path
from typing import Iterable

import pandas as pd

from ptsdpredict.errors import DataError, MissingColumn, RaggedRow
from ptsdpredict.file_manager import atomic_write_text
from ptsdpredict.tabular.table import MISSING, Schema, Table

logger = logging.getLogger(__name__)

DEFAULT_MISSING_TOKENS = frozenset({"", "NA", "N/A"})
# Missing cells are always written as this token
CANONICAL_MISSING = ""

_LONG_ROW = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


def _read_raw(path: Path) -> pd.DataFrame:
    """
    Every line of the file as text cells, header row included.

    The python engine pads short rows with NA and rejects long ones; no cell
    text is turned into NA.
    """
    try:
        return pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            engine="python",
            encoding="utf-8-sig",
            skip_blank_lines=True,
        )
    except UnicodeDecodeError as e:
        raise DataError(f"Dataset {path} is not valid UTF-8: {e}")
    except pd.errors.EmptyDataError:
        raise DataError(f"Dataset {path} has no header row")
    except pd.errors.ParserError as e:
        match = _LONG_ROW.search(str(e))
        if match:
            expected, line, found = (int(group) for group in match.groups())
            raise RaggedRow(line, expected, found)
        raise DataError(f"Dataset {path} is not a readable CSV file: {e}")
    except OSError as e:
        raise DataError(f"Cannot read dataset {path}: {e}")


def load_csv(path, schema: Schema, missing_tokens: Iterable[str] = DEFAULT_MISSING_TOKENS) -> Table:
    """
    Load a survey CSV into a ``Table``.

    Header names are trimmed before they are matched against the schema;
    columns the schema does not name are ignored. Cells equal (after trimming)
    to one of ``missing_tokens`` become ``MISSING``.

    Args:
        path: CSV file, UTF-8, first row header, RFC 4180 quoting.
        schema (Schema): Expected columns.
        missing_tokens: Cell texts treated as missing.

    Returns:
        Table: one row per data row of the file.

    Raises:
        MissingColumn: a schema column is absent from the header.
        RaggedRow: a data row has a different number of fields than the header.
        DataError: the file cannot be opened, decoded or parsed.
    """
    tokens = {token.strip() for token in missing_tokens}
    path = Path(path)
    raw = _read_raw(path)
    if raw.apply(lambda cells: cells.str.contains("\0", regex=False, na=False)).to_numpy().any():
        raise DataError(f"Dataset {path} contains NUL bytes")

    header = [str(name).strip() for name in raw.iloc[0]]
    data = raw.iloc[1:]
    short = data.isna().to_numpy()
    if short.any():
        # Blank lines are skipped, so the line is counted over non-blank lines
        index = int(short.any(axis=1).argmax())
        raise RaggedRow(index + 2, len(header), int((~short[index]).sum()))

    cells = {}
    for column in schema:
        if column.name not in header:
            raise MissingColumn(column.name)
        values = data.iloc[:, header.index(column.name)].tolist()
        cells[column.name] = [MISSING if value.strip() in tokens else value for value in values]

    table = Table(schema, cells)
    logger.debug(f"Loaded {table.n_rows} rows from {path}")
    return table


def table_to_frame(table: Table) -> pd.DataFrame:
    """Table cells as an object frame, ``MISSING`` as None."""
    return pd.DataFrame(
        {
            name: [None if cell is MISSING else cell for cell in table.column(name)]
            for name in table.schema.names
        },
        columns=table.schema.names,
        dtype=object,
    )


def table_to_csv(table: Table) -> str:
    return table_to_frame(table).to_csv(index=False, lineterminator="\n", na_rep=CANONICAL_MISSING)


def write_csv(table: Table, path) -> Path:
    return atomic_write_text(path, table_to_csv(table))
