import json
import os
import tempfile
from pathlib import Path

import pandas as pd
import yaml

from ptsdpredict.errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parent / "config"
DEFAULT_EXPERIMENT_CONFIG = CONFIG_DIR / "experiment_config.yaml"
DEFAULT_SCHEMA = CONFIG_DIR / "survey_schema.yaml"

_TRUE = {"1", "true", "yes", "on", "y"}
_FALSE = {"0", "false", "no", "off", "n"}


def load_config(config_file):
    try:
        with open(config_file, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise ConfigError(f"The configuration file '{config_file}' was not found.")
    except yaml.YAMLError as e:
        raise ConfigError(f"The configuration file '{config_file}' is not valid YAML: {e}")


def resolve_config_path(path, default):
    """Return ``path`` if it exists, otherwise the packaged file of the same name."""
    if not path:
        return Path(default)
    candidate = Path(path)
    if candidate.exists():
        return candidate
    packaged = CONFIG_DIR / candidate.name
    if not candidate.is_absolute() and packaged.exists():
        return packaged
    return candidate


def str2bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def add_arguments_from_config(parser, config, sections=("experiment",)):
    """Add one ``--flag`` per ``{value, help}`` entry of the given sections.

    Flags default to ``None`` so that only explicitly given flags override the
    merged configuration; the YAML value is shown in the help text.
    """
    existing_args = set()
    for section in sections:
        for param, details in (config.get(section) or {}).items():
            arg_name = f"--{param.replace('_', '-')}"
            if arg_name in existing_args:
                continue
            existing_args.add(arg_name)
            value = details["value"]
            if isinstance(value, bool):
                arg_type = str2bool
            elif value is None or isinstance(value, (list, dict)):
                arg_type = str
            else:
                arg_type = type(value)
            parser.add_argument(
                arg_name,
                dest=param,
                type=arg_type,
                default=None,
                help=f"{details['help']} (default: {value})",
            )


def section_values(config, section="experiment"):
    """Flatten a ``{param: {value, help}}`` section to ``{param: value}``."""
    values = {}
    for param, details in (config.get(section) or {}).items():
        values[param] = details["value"] if isinstance(details, dict) and "value" in details else details
    return values


def merge_mappings(base, override):
    """Recursive dict merge; ``override`` wins, lists are replaced."""
    merged = dict(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_mappings(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_schema(schema_file):
    # tabular.csv_io imports this module
    from ptsdpredict.tabular.table import Schema

    return Schema.from_mapping(load_config(schema_file))


# ---------------------------------------------------------------------------
# Artifact writers. Every file is written to a temporary sibling and renamed
# so readers never observe a half-written artifact.
# ---------------------------------------------------------------------------
def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    return path


def dump_json(document):
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def write_json(path, document):
    return atomic_write_text(path, dump_json(document))


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def format_csv(header, rows):
    frame = pd.DataFrame(list(rows), columns=list(header), dtype=object)
    return frame.to_csv(index=False, lineterminator="\n", na_rep="")


def write_csv_rows(path, header, rows):
    return atomic_write_text(path, format_csv(header, rows))


def read_csv_rows(path):
    """Return ``(header, rows)`` of a CSV artifact, cells as text."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        return [], []
    return list(frame.columns), frame.to_numpy().tolist()
