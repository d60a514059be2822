"""Seeded random search over network widths, dropout and learning rate."""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ptsdpredict.errors import ConfigError, PtsdError
from ptsdpredict.learners.mlp import MlpHyper, MlpModel
from ptsdpredict.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

N_LAYERS = 4
TRIAL_LOG_HEADER = ("trial", "units1", "units2", "units3", "units4", "dropout", "lr", "val_score", "status")


@dataclass(frozen=True)
class SearchSpace:
    widths: Tuple[int, ...] = (64, 128, 256, 512, 1024)
    dropouts: Tuple[float, ...] = (0.2, 0.3, 0.5)
    learning_rates: Tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    n_layers: int = N_LAYERS

    def __post_init__(self):
        if not (self.widths and self.dropouts and self.learning_rates):
            raise ConfigError("Every search-space list must be non-empty")
        if any(not 0.0 <= d < 1.0 for d in self.dropouts):
            raise ConfigError(f"Dropout rates must be in [0, 1), got {self.dropouts}")
        if any(lr <= 0.0 for lr in self.learning_rates):
            raise ConfigError(f"Learning rates must be positive, got {self.learning_rates}")
        if any(int(w) < 1 for w in self.widths):
            raise ConfigError(f"Layer widths must be positive, got {self.widths}")
        if self.n_layers < 1:
            raise ConfigError(f"The network needs at least one hidden layer, got {self.n_layers}")

    @classmethod
    def from_mapping(cls, mapping) -> "SearchSpace":
        mapping = dict(mapping or {})
        unknown = sorted(set(mapping) - {"widths", "dropouts", "learning_rates", "n_layers"})
        if unknown:
            raise ConfigError(f"Unknown search-space keys: {unknown}")
        return cls(
            widths=tuple(int(w) for w in mapping.get("widths", cls.widths)),
            dropouts=tuple(float(d) for d in mapping.get("dropouts", cls.dropouts)),
            learning_rates=tuple(float(lr) for lr in mapping.get("learning_rates", cls.learning_rates)),
            n_layers=int(mapping.get("n_layers", N_LAYERS)),
        )

    @property
    def size(self) -> int:
        return len(self.widths) ** self.n_layers * len(self.dropouts) * len(self.learning_rates)

    def config_at(self, index: int) -> "TrialConfig":
        """Decode a flat index into the Cartesian product (widths vary slowest)."""
        index, lr_index = divmod(int(index), len(self.learning_rates))
        index, dropout_index = divmod(index, len(self.dropouts))
        widths = []
        for _ in range(self.n_layers):
            index, width_index = divmod(index, len(self.widths))
            widths.append(self.widths[width_index])
        return TrialConfig(
            widths=tuple(reversed(widths)),
            dropout=self.dropouts[dropout_index],
            learning_rate=self.learning_rates[lr_index],
        )


@dataclass(frozen=True)
class TrialConfig:
    widths: Tuple[int, ...]
    dropout: float
    learning_rate: float

    def apply(self, hyper: MlpHyper) -> MlpHyper:
        return replace(hyper, hidden_widths=self.widths, dropout=self.dropout, learning_rate=self.learning_rate)


@dataclass
class Trial:
    index: int
    config: TrialConfig
    score: Optional[float] = None
    status: str = "ok"

    @property
    def completed(self) -> bool:
        return self.status == "ok"

    def to_row(self) -> list:
        widths = list(self.config.widths) + [""] * (N_LAYERS - len(self.config.widths))
        score = "" if self.score is None else repr(float(self.score))
        return [self.index, *widths[:N_LAYERS], self.config.dropout, self.config.learning_rate, score, self.status]


@dataclass
class SearchResult:
    best: Optional[Trial]
    trials: List[Trial] = field(default_factory=list)

    @property
    def best_config(self) -> Optional[TrialConfig]:
        return self.best.config if self.best else None

    def log_rows(self) -> list:
        return [list(TRIAL_LOG_HEADER)] + [trial.to_row() for trial in self.trials]


def draw_indices(space_size: int, n_trials: int, seed: int) -> List[int]:
    """Uniform with-replacement draws, deduplicated in draw order."""
    rng = np.random.default_rng(seed)
    wanted = min(n_trials, space_size)
    seen, order = set(), []
    while len(order) < wanted:
        index = int(rng.integers(0, space_size))
        if index not in seen:
            seen.add(index)
            order.append(index)
    return order


def _run_trial(index, config, evaluate):
    try:
        score = float(evaluate(config))
    except (PtsdError, ArithmeticError, ValueError) as error:
        logger.warning(f"Search trial {index} ({config}) failed: {error}")
        return Trial(index, config, None, f"failed: {type(error).__name__}"), error
    if not np.isfinite(score):
        logger.warning(f"Search trial {index} ({config}) scored {score}")
        return Trial(index, config, None, "failed: non-finite score"), None
    return Trial(index, config, score), None


def random_search(
    space: SearchSpace,
    n_trials: int,
    seed: int,
    evaluate: Callable[[TrialConfig], float],
    n_jobs: int = 1,
) -> SearchResult:
    """
    Evaluate distinct random configurations and keep the best.

    Args:
        space: candidate widths, dropout rates and learning rates
        n_trials: number of distinct configurations (capped at the space size)
        seed: seed of the draw sequence
        evaluate: maps a TrialConfig to a validation score, higher is better
        n_jobs: trials run on this many threads

    Returns:
        SearchResult: the winner (earliest trial on ties) and the trial log in
        trial order.
    """
    if n_trials < 1:
        raise ConfigError(f"Random search needs at least one trial, got {n_trials}")
    indices = draw_indices(space.size, n_trials, seed)
    configs = [space.config_at(index) for index in indices]
    outcomes = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_run_trial)(trial, config, evaluate) for trial, config in enumerate(configs)
    )
    trials = [trial for trial, _ in outcomes]
    completed = [trial for trial in trials if trial.completed]
    if not completed:
        errors = [error for _, error in outcomes if error is not None]
        if errors:
            raise errors[0]
        raise ConfigError("Every search trial failed")
    best = completed[0]
    for trial in completed[1:]:
        if trial.score > best.score:
            best = trial
    logger.info(
        f"Random search: {len(completed)}/{len(trials)} trials completed, best trial "
        f"{best.index} {best.config} scored {best.score:.4f}"
    )
    return SearchResult(best=best, trials=trials)


def mlp_trial_evaluator(
    X, y, base_hyper: MlpHyper, seed: int, callback_factory: Callable[[], Sequence] = tuple
) -> Callable[[TrialConfig], float]:
    """
    Score a configuration by the validation accuracy of its best-loss epoch.

    The network's own validation holdout is used, so the test split stays
    untouched during the search.
    """

    def evaluate(config: TrialConfig) -> float:
        model = MlpModel(config.apply(base_hyper))
        model.fit(X, y, seed=derive_seed(seed, "trial"), callbacks=callback_factory())
        history = model.history
        best_epoch = history.best_epoch()
        return next(record.val_acc for record in history if record.epoch == best_epoch)

    return evaluate
