"""Survey-shaped synthetic data with a planted, noisy decision rule."""

import logging
from pathlib import Path

import numpy as np

from ptsdpredict.errors import ConfigError
from ptsdpredict.experiment.config import SyntheticSpec
from ptsdpredict.file_manager import write_json
from ptsdpredict.tabular.csv_io import write_csv
from ptsdpredict.tabular.table import MISSING, Schema, Table

logger = logging.getLogger(__name__)


def category_name(index: int) -> str:
    return f"c{index}"


def rule_holds(codes: np.ndarray, rule) -> np.ndarray:
    """Row mask where at least one (feature, category) literal holds."""
    holds = np.zeros(codes.shape[0], dtype=bool)
    for feature, category in rule:
        holds |= codes[:, feature] == category
    return holds


def _sample_rule_features(rng, spec: SyntheticSpec, satisfied: bool, n: int) -> np.ndarray:
    """Codes of the rule features for ``n`` rows, conditioned on the rule value."""
    features = spec.rule_features
    out = np.zeros((n, len(features)), dtype=np.int64)
    local_rule = [(features.index(f), c) for f, c in spec.rule]
    if not satisfied:
        for j, feature in enumerate(features):
            allowed = [c for c in range(spec.categories[feature]) if (feature, c) not in spec.rule]
            out[:, j] = rng.choice(allowed, size=n)
        return out
    # Uniform over the satisfying assignments by rejection
    pending = np.arange(n)
    while pending.size:
        draw = np.column_stack(
            [rng.integers(0, spec.categories[f], size=pending.size) for f in features]
        )
        ok = rule_holds(draw, local_rule)
        out[pending[ok]] = draw[ok]
        pending = pending[~ok]
    return out


def sample_codes(spec: SyntheticSpec, seed: int):
    """
    Draw labels and feature category codes.

    Returns:
        tuple: (codes of shape (n_rows, n_features), labels, noise flags)
    """
    rng = np.random.default_rng(seed)
    n = spec.n_rows
    labels = np.zeros(n, dtype=np.int64)
    labels[: spec.n_positive] = 1
    labels = rng.permutation(labels)
    noisy = rng.random(n) < spec.noise
    clean = labels ^ noisy.astype(np.int64)

    codes = np.column_stack([rng.integers(0, k, size=n) for k in spec.categories])
    rule_columns = list(spec.rule_features)
    for satisfied in (False, True):
        rows = np.nonzero(clean == int(satisfied))[0]
        codes[np.ix_(rows, rule_columns)] = _sample_rule_features(rng, spec, satisfied, rows.size)
    return codes, labels, noisy


def generate_table(spec: SyntheticSpec, schema: Schema, seed: int) -> Table:
    feature_columns = schema.feature_columns
    if len(feature_columns) != len(spec.categories):
        raise ConfigError(
            f"The schema has {len(feature_columns)} features, "
            f"the synthetic spec describes {len(spec.categories)}"
        )
    codes, labels, _ = sample_codes(spec, seed)
    missing_rng = np.random.default_rng([seed, 1])
    columns = {}
    for j, name in enumerate(feature_columns):
        cells = [category_name(code) for code in codes[:, j]]
        if spec.missing_rate > 0 and j not in spec.rule_features:
            for i in np.nonzero(missing_rng.random(len(cells)) < spec.missing_rate)[0]:
                cells[i] = MISSING
        columns[name] = cells
    target = schema.target
    columns[target.name] = [target.positive if y else target.negative for y in labels]
    return Table(schema, columns)


def sidecar_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(f"{csv_path.stem}.rule.json")


def generate_synthetic(spec: SyntheticSpec, seed: int, out_path, schema: Schema) -> Path:
    """
    Write a synthetic survey CSV and a sidecar JSON describing its rule.

    Returns:
        Path: the CSV path
    """
    table = generate_table(spec, schema, seed)
    out_path = write_csv(table, out_path)
    features = schema.feature_columns
    write_json(
        sidecar_path(out_path),
        {
            "seed": seed,
            "spec": spec.to_dict(),
            "rule": [
                {"column": features[feature], "category": category_name(category)}
                for feature, category in spec.rule
            ],
            "n_positive": spec.n_positive,
            "n_negative": spec.n_rows - spec.n_positive,
            "bayes_accuracy": spec.bayes_accuracy(),
        },
    )
    logger.info(
        f"Wrote {spec.n_rows} synthetic rows to {out_path} "
        f"(Bayes accuracy {spec.bayes_accuracy():.4f})"
    )
    return out_path
