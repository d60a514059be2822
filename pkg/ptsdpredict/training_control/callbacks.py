"""
Early stopping and learning-rate reduction on plateau.

The step functions are pure: they take a frozen state and return the next
state with a decision. The callback classes wrap them for ``fit_mlp``, which
calls ``on_train_begin(model)``, ``on_epoch_end(epoch, record, model)`` and
``on_train_end(model)``.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, List, Mapping, Optional, Tuple

from ptsdpredict.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EarlyStopState:
    patience: int = 10
    min_delta: float = 1e-4
    best_loss: float = math.inf
    best_epoch: int = -1
    epochs_since_improve: int = 0
    best_weights: Any = None


@dataclass(frozen=True)
class EarlyStopDecision:
    stop: bool
    restore_weights: Any = None


def early_stop_step(
    state: EarlyStopState, epoch: int, val_loss: float, current_weights
) -> Tuple[EarlyStopState, EarlyStopDecision]:
    """
    Advance early stopping by one epoch.

    Args:
        state: state after the previous epoch
        epoch: index of the epoch just finished
        val_loss: its validation loss
        current_weights: weight snapshot of the model after this epoch

    Returns:
        tuple: (next state, decision). A stop decision carries the best-epoch
        snapshot to restore.
    """
    if val_loss < state.best_loss - state.min_delta:
        state = replace(
            state,
            best_loss=float(val_loss),
            best_epoch=epoch,
            epochs_since_improve=0,
            best_weights=current_weights,
        )
    else:
        state = replace(state, epochs_since_improve=state.epochs_since_improve + 1)
    if state.epochs_since_improve >= state.patience:
        return state, EarlyStopDecision(stop=True, restore_weights=state.best_weights)
    return state, EarlyStopDecision(stop=False)


@dataclass(frozen=True)
class PlateauState:
    current_lr: float
    factor: float = 0.5
    patience: int = 5
    min_lr: float = 1e-6
    min_delta: float = 1e-4
    best_loss: float = math.inf
    epochs_since_improve: int = 0

    def __post_init__(self):
        if not 0.0 < self.factor < 1.0:
            raise ConfigError(f"Plateau factor must be in (0, 1), got {self.factor}")
        if self.current_lr <= 0.0:
            raise ConfigError(f"Learning rate must be positive, got {self.current_lr}")


def plateau_step(state: PlateauState, epoch: int, val_loss: float) -> Tuple[PlateauState, float]:
    """
    Advance the plateau schedule by one epoch.

    Returns:
        tuple: (next state, learning rate for the next epoch)
    """
    if val_loss < state.best_loss - state.min_delta:
        state = replace(state, best_loss=float(val_loss), epochs_since_improve=0)
    else:
        state = replace(state, epochs_since_improve=state.epochs_since_improve + 1)
    if state.epochs_since_improve >= state.patience:
        lr = max(state.current_lr * state.factor, state.min_lr)
        state = replace(state, current_lr=min(lr, state.current_lr), epochs_since_improve=0)
    return state, state.current_lr


class Callback:
    def on_train_begin(self, model):
        pass

    def on_epoch_end(self, epoch, record, model):
        pass

    def on_train_end(self, model):
        pass


class EarlyStopping(Callback):
    """Stop when validation loss stalls; restore the best-epoch weights at the end."""

    def __init__(self, patience: int = 10, min_delta: float = 1e-4, restore_best_weights: bool = True):
        if patience < 1:
            raise ConfigError(f"Early-stopping patience must be at least 1, got {patience}")
        self.patience = patience
        self.min_delta = min_delta
        self.restore_best_weights = restore_best_weights
        self.state = None
        self.stopped_epoch = None

    def on_train_begin(self, model):
        self.state = EarlyStopState(patience=self.patience, min_delta=self.min_delta)
        self.stopped_epoch = None

    def on_epoch_end(self, epoch, record, model):
        self.state, decision = early_stop_step(self.state, epoch, record.val_loss, model.get_weights())
        if decision.stop:
            self.stopped_epoch = epoch
            model.stop_training = True
            logger.info(
                f"Early stopping at epoch {epoch}; best validation loss "
                f"{self.state.best_loss:.4f} at epoch {self.state.best_epoch}"
            )

    def on_train_end(self, model):
        if self.restore_best_weights and self.state and self.state.best_weights is not None:
            model.set_weights(self.state.best_weights)
            logger.debug(f"Restored weights of epoch {self.state.best_epoch}")


class ReduceLROnPlateau(Callback):
    def __init__(self, factor: float = 0.5, patience: int = 5, min_lr: float = 1e-6, min_delta: float = 1e-4):
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.min_delta = min_delta
        self.state = None

    def on_train_begin(self, model):
        self.state = PlateauState(
            current_lr=model.learning_rate,
            factor=self.factor,
            patience=self.patience,
            min_lr=self.min_lr,
            min_delta=self.min_delta,
        )

    def on_epoch_end(self, epoch, record, model):
        previous = self.state.current_lr
        self.state, lr = plateau_step(self.state, epoch, record.val_loss)
        if lr < previous:
            logger.info(f"Epoch {epoch}: reducing learning rate {previous:g} -> {lr:g}")
        model.learning_rate = lr


CALLBACKS = {"early_stopping": EarlyStopping, "reduce_lr_on_plateau": ReduceLROnPlateau}


def callbacks_from_config(config: Optional[Mapping]) -> List[Callback]:
    """
    Build callbacks from the ``callbacks`` config section.

    Each key names a callback; its value is a mapping of constructor
    arguments, or false/None to disable it.
    """
    callbacks = []
    for name, params in (config or {}).items():
        if name not in CALLBACKS:
            raise ConfigError(f"Unknown callback {name!r}, expected one of {sorted(CALLBACKS)}")
        if params is False or params is None:
            continue
        if params is True:
            params = {}
        try:
            callbacks.append(CALLBACKS[name](**dict(params)))
        except TypeError as error:
            raise ConfigError(f"Invalid parameters for callback {name!r}: {error}") from error
    return callbacks
