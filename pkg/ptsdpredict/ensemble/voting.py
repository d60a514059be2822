"""Soft-voting ensemble over independently fitted classifiers."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Mapping, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from ptsdpredict.errors import ConfigError, EmptyEnsemble
from ptsdpredict.file_manager import read_json, write_json
from ptsdpredict.learners.base import DEFAULT_THRESHOLD, as_matrix
from ptsdpredict.learners.mlp import MlpModel
from ptsdpredict.learners.registry import DISPLAY_NAMES, build_classifier, check_kind, model_from_dict
from ptsdpredict.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST_NAME = "ensemble.json"
PRESETS = {
    "ensemble3": ("mlp", "forest", "gbt_xgb"),
    "ensemble6": ("logistic", "svm", "forest", "gbt_xgb", "gbt_lgbm", "mlp"),
}


def normalise_weights(weights: Optional[Sequence[float]], n_members: int) -> List[float]:
    """Non-negative weights scaled to sum to 1; uniform when ``weights`` is None."""
    if n_members < 2:
        raise EmptyEnsemble(n_members)
    if weights is None:
        return [1.0 / n_members] * n_members
    weights = [float(w) for w in weights]
    if len(weights) != n_members:
        raise ConfigError(f"Got {len(weights)} weights for {n_members} members")
    if any(not math.isfinite(w) or w < 0.0 for w in weights):
        raise ConfigError(f"Ensemble weights must be finite and non-negative, got {weights}")
    total = math.fsum(weights)
    if total <= 0.0:
        raise ConfigError("Ensemble weights must not all be zero")
    return [w / total for w in weights]


@dataclass
class VotingEnsemble:
    members: list
    weights: List[float] = None
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.weights = normalise_weights(self.weights, len(self.members))
        if not self.names:
            self.names = [member.kind for member in self.members]
        widths = {member.n_features_ for member in self.members}
        if len(widths) > 1:
            raise ConfigError(f"Ensemble members disagree on the feature count: {sorted(widths)}")

    @property
    def n_features_(self) -> int:
        return self.members[0].n_features_

    def predict_proba(self, X) -> np.ndarray:
        return soft_vote(self, X)

    def predict(self, X, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def member_probabilities(self, X) -> np.ndarray:
        """(n_rows, n_members) class-1 probabilities."""
        return np.column_stack([member.predict_proba(X) for member in self.members])


def soft_vote(ensemble: VotingEnsemble, X) -> np.ndarray:
    """
    Weighted mean of member probabilities.

    Each row is summed with ``math.fsum`` and clipped to the members' range,
    so the result does not depend on member order and a vote over copies of
    one model returns that model's probabilities exactly.
    """
    if len(ensemble.members) < 2:
        raise EmptyEnsemble(len(ensemble.members))
    probabilities = ensemble.member_probabilities(as_matrix(X))
    weighted = probabilities * np.asarray(ensemble.weights)
    voted = np.array([math.fsum(row) for row in weighted], dtype=np.float64)
    return np.clip(voted, probabilities.min(axis=1), probabilities.max(axis=1))


@dataclass(frozen=True)
class MemberConfig:
    kind: str
    params: Mapping = field(default_factory=dict)


def member_configs(preset_or_kinds, model_params: Mapping = None) -> List[MemberConfig]:
    """
    Member list of a named preset (or an explicit list of model kinds).

    Args:
        preset_or_kinds: ``"ensemble3"``, ``"ensemble6"`` or a list of kinds
        model_params: per-kind hyperparameters, e.g. the ``models`` config section
    """
    if isinstance(preset_or_kinds, str):
        if preset_or_kinds not in PRESETS:
            raise ConfigError(
                f"Unknown ensemble preset {preset_or_kinds!r}, expected one of {sorted(PRESETS)}"
            )
        kinds = PRESETS[preset_or_kinds]
    else:
        kinds = list(preset_or_kinds)
    model_params = model_params or {}
    return [MemberConfig(check_kind(kind), dict(model_params.get(kind) or {})) for kind in kinds]


def _fit_member(index, config, X, y, seed, callback_factory):
    model = build_classifier(config.kind, config.params)
    member_seed = derive_seed(seed, "member", index)
    logger.info(f"Fitting member {index}: {DISPLAY_NAMES[config.kind]}")
    if isinstance(model, MlpModel):
        return model.fit(X, y, seed=member_seed, callbacks=callback_factory())
    return model.fit(X, y, seed=member_seed)


def fit_ensemble(
    X,
    y,
    configs: Sequence[MemberConfig],
    seed: int = 0,
    weights: Sequence[float] = None,
    callback_factory: Callable[[], Sequence] = tuple,
    n_jobs: int = 1,
) -> VotingEnsemble:
    """
    Fit every member on the same data with its own derived seed.

    Args:
        X: training features
        y: training labels
        configs: member kinds and hyperparameters, at least two
        seed: experiment seed; member i uses a seed derived from (seed, i)
        weights: optional voting weights, uniform by default
        callback_factory: returns fresh callbacks for each network member
        n_jobs: members fitted on this many threads

    Returns:
        VotingEnsemble
    """
    configs = list(configs)
    if len(configs) < 2:
        raise EmptyEnsemble(len(configs))
    normalise_weights(weights, len(configs))
    members = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_fit_member)(index, config, X, y, seed, callback_factory)
        for index, config in enumerate(configs)
    )
    return VotingEnsemble(members, weights, [config.kind for config in configs])


def ensemble_history(ensemble: VotingEnsemble):
    """Training history of the first network member; trees have no epochs."""
    for member in ensemble.members:
        if isinstance(member, MlpModel):
            return member.history
    return None


def member_file_name(index: int, kind: str) -> str:
    return f"member_{index}_{kind}.json"


def save_ensemble(ensemble: VotingEnsemble, directory) -> Path:
    """Write each member model and a manifest referencing them; returns the manifest path."""
    directory = Path(directory)
    entries = []
    for index, (name, member) in enumerate(zip(ensemble.names, ensemble.members)):
        file_name = member_file_name(index, name)
        write_json(directory / file_name, member.to_dict())
        entries.append({"kind": member.kind, "file": file_name})
    return write_json(
        directory / MANIFEST_NAME,
        {
            "format": "ptsdpredict.ensemble",
            "version": FORMAT_VERSION,
            "averaging": "soft",
            "weights": list(ensemble.weights),
            "members": entries,
        },
    )


def load_ensemble(manifest_path) -> VotingEnsemble:
    manifest_path = Path(manifest_path)
    manifest = read_json(manifest_path)
    if manifest.get("format") != "ptsdpredict.ensemble" or manifest.get("version") != FORMAT_VERSION:
        raise ConfigError(f"{manifest_path} is not a supported ensemble manifest")
    members = [model_from_dict(read_json(manifest_path.parent / entry["file"])) for entry in manifest["members"]]
    return VotingEnsemble(members, manifest["weights"], [entry["kind"] for entry in manifest["members"]])
