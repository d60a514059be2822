"""Validated experiment configuration.

The merged configuration mapping has the sections of
``config/experiment_config.yaml``: ``experiment`` (flat values),
``models``, ``callbacks``, ``search_space``, ``synthetic`` and
``compare_models``.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from ptsdpredict.ensemble.voting import PRESETS
from ptsdpredict.errors import ConfigError
from ptsdpredict.file_manager import (
    DEFAULT_EXPERIMENT_CONFIG,
    load_config,
    merge_mappings,
    section_values,
)
from ptsdpredict.learners.registry import MODEL_KINDS
from ptsdpredict.metrics.evaluation import AVERAGING_MODES

ENSEMBLE_ENTRY = "ensemble"
SECTIONS = ("experiment", "models", "callbacks", "search_space", "synthetic", "compare_models")


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Planted-rule survey generator settings.

    ``rule`` is a disjunction of (feature index, category index) literals: a
    row's clean label is 1 exactly when one literal holds. ``imbalance`` is
    the class-0 to class-1 ratio and ``noise`` the probability that a row's
    label is flipped relative to the rule.
    """

    n_rows: int = 2000
    imbalance: float = 4.0
    noise: float = 0.05
    categories: Tuple[int, ...] = (6, 5, 4, 3, 4, 4, 3)
    rule: Tuple[Tuple[int, int], ...] = ((4, 0), (5, 1), (6, 0))
    missing_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(int(c) for c in self.categories))
        object.__setattr__(self, "rule", tuple((int(f), int(c)) for f, c in self.rule))
        if self.n_rows < 2:
            raise ConfigError(f"Synthetic data needs at least 2 rows, got {self.n_rows}")
        if not self.imbalance > 0:
            raise ConfigError(f"Class imbalance must be positive, got {self.imbalance}")
        if not 0.0 <= self.noise < 0.5:
            raise ConfigError(f"Label noise must be in [0, 0.5), got {self.noise}")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ConfigError(f"Missing rate must be in [0, 1), got {self.missing_rate}")
        if any(c < 2 for c in self.categories):
            raise ConfigError(f"Every feature needs at least 2 categories, got {self.categories}")
        if not 1 <= len(self.rule) <= 3:
            raise ConfigError(f"The planted rule needs 1 to 3 literals, got {len(self.rule)}")
        for feature, category in self.rule:
            if not 0 <= feature < len(self.categories):
                raise ConfigError(f"Rule feature {feature} is out of range")
            if not 0 <= category < self.categories[feature]:
                raise ConfigError(f"Rule category {category} is out of range for feature {feature}")
        for feature in self.rule_features:
            literal_categories = {c for f, c in self.rule if f == feature}
            if len(literal_categories) >= self.categories[feature]:
                raise ConfigError(f"The rule covers every category of feature {feature}")

    @property
    def rule_features(self) -> Tuple[int, ...]:
        return tuple(sorted({feature for feature, _ in self.rule}))

    @property
    def n_positive(self) -> int:
        return int(math.floor(self.n_rows / (self.imbalance + 1.0) + 0.5))

    def bayes_accuracy(self) -> float:
        """Best achievable accuracy: predict the rule, unless noise outweighs a prior."""
        pi1 = self.n_positive / self.n_rows
        pi0 = 1.0 - pi1
        eta = self.noise
        return max(pi1 * (1.0 - eta), pi0 * eta) + max(pi0 * (1.0 - eta), pi1 * eta)

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "SyntheticSpec":
        mapping = dict(mapping or {})
        unknown = sorted(set(mapping) - {"n_rows", "imbalance", "noise", "categories", "rule", "missing_rate"})
        if unknown:
            raise ConfigError(f"Unknown synthetic keys: {unknown}")
        if "rule" in mapping:
            mapping["rule"] = tuple(tuple(literal) for literal in mapping["rule"])
        if "categories" in mapping:
            mapping["categories"] = tuple(mapping["categories"])
        try:
            return cls(**mapping)
        except (TypeError, ValueError) as error:
            raise ConfigError(f"Invalid synthetic spec: {error}") from error

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "imbalance": self.imbalance,
            "noise": self.noise,
            "categories": list(self.categories),
            "rule": [list(literal) for literal in self.rule],
            "missing_rate": self.missing_rate,
        }


def parse_weights(value) -> Optional[Tuple[float, ...]]:
    """Ensemble weights from a YAML list or a comma-separated flag value."""
    if value is None or value == "":
        return None
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    try:
        return tuple(float(w) for w in value)
    except (TypeError, ValueError):
        raise ConfigError(f"Ensemble weights must be numbers, got {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    data: Optional[str] = None
    schema: str = "survey_schema.yaml"
    out: str = "results"
    test_fraction: float = 0.2
    smote: bool = True
    smote_k: int = 5
    model: Optional[str] = None
    ensemble: str = "ensemble3"
    averaging: str = "weighted"
    weights: Optional[Tuple[float, ...]] = None
    threshold: float = 0.5
    drop_missing_target: bool = False
    n_trials: int = 20
    n_jobs: int = 1
    verbose: int = 2
    log_folder: str = "logs"
    models: Dict[str, dict] = field(default_factory=dict)
    callbacks: Dict[str, dict] = field(default_factory=dict)
    search_space: Dict[str, list] = field(default_factory=dict)
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    compare_models: List[str] = field(default_factory=list)

    @classmethod
    def from_mapping(cls, config: Mapping) -> "ExperimentConfig":
        """
        Validate a merged configuration mapping.

        Raises:
            ConfigError: a missing seed, an out-of-range value, or an unknown
                preset, averaging mode or model kind.
        """
        values = dict(config.get("experiment") or {})
        known = {f for f in cls.__dataclass_fields__} - {
            "models",
            "callbacks",
            "search_space",
            "synthetic",
            "compare_models",
        }
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown experiment settings: {unknown}")
        if values.get("seed") is None:
            raise ConfigError("A seed is required")

        models = dict(config.get("models") or {})
        for kind in models:
            if kind not in MODEL_KINDS:
                raise ConfigError(f"Hyperparameters given for unknown model kind {kind!r}")
        compare_models = list(config.get("compare_models") or [])
        for kind in compare_models:
            if kind != ENSEMBLE_ENTRY and kind not in MODEL_KINDS:
                raise ConfigError(f"Unknown model kind in compare list: {kind!r}")

        values["weights"] = parse_weights(values.get("weights"))
        try:
            experiment = cls(
                **values,
                models=models,
                callbacks=dict(config.get("callbacks") or {}),
                search_space=dict(config.get("search_space") or {}),
                synthetic=SyntheticSpec.from_mapping(config.get("synthetic")),
                compare_models=compare_models,
            )
        except TypeError as error:
            raise ConfigError(f"Invalid experiment configuration: {error}") from error
        experiment.check()
        return experiment

    def check(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"Seed must be a non-negative integer, got {self.seed!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.smote_k < 1:
            raise ConfigError(f"smote_k must be at least 1, got {self.smote_k}")
        if self.ensemble not in PRESETS:
            raise ConfigError(f"Unknown ensemble preset {self.ensemble!r}, expected one of {sorted(PRESETS)}")
        if self.model is not None and self.model not in MODEL_KINDS:
            raise ConfigError(f"Unknown model kind {self.model!r}")
        if self.averaging not in AVERAGING_MODES:
            raise ConfigError(f"Unknown averaging mode {self.averaging!r}, expected one of {AVERAGING_MODES}")
        if self.weights is not None:
            if any(not math.isfinite(w) or w < 0 for w in self.weights):
                raise ConfigError(f"Ensemble weights must be non-negative, got {self.weights}")
            if self.model is None and len(self.weights) != len(PRESETS[self.ensemble]):
                raise ConfigError(
                    f"{len(self.weights)} weights given for the "
                    f"{len(PRESETS[self.ensemble])}-member preset {self.ensemble}"
                )
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"Threshold must be in [0, 1], got {self.threshold}")
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be at least 1, got {self.n_trials}")

    def model_params(self, kind: str) -> dict:
        return dict(self.models.get(kind) or {})


def user_sections(config: Mapping) -> dict:
    """A config file's sections, ``experiment`` flattened to plain values."""
    unknown = sorted(set(config) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"Unknown configuration sections: {unknown}")
    sections = {key: value for key, value in config.items() if key != "experiment"}
    sections["experiment"] = section_values(config, "experiment")
    return sections


def build_config(user_config_file=None, overrides: Mapping = None, defaults_file=DEFAULT_EXPERIMENT_CONFIG) -> ExperimentConfig:
    """
    Merge packaged defaults, an optional user file and explicit overrides.

    Precedence, lowest first: packaged YAML, ``user_config_file``,
    ``overrides`` (flag values; None entries are ignored).
    """
    merged = user_sections(load_config(defaults_file))
    if user_config_file:
        merged = merge_mappings(merged, user_sections(load_config(user_config_file)))
    flags = {key: value for key, value in (overrides or {}).items() if value is not None}
    merged["experiment"] = merge_mappings(merged["experiment"], flags)
    return ExperimentConfig.from_mapping(merged)
