import math

import numpy as np
import pytest

from conftest import blobs

from ptsdpredict.errors import ConfigError, NonFiniteLoss
from ptsdpredict.learners import MlpHyper
from ptsdpredict.learners.history import EpochRecord
from ptsdpredict.training_control import (
    TRIAL_LOG_HEADER,
    EarlyStopping,
    EarlyStopState,
    PlateauState,
    ReduceLROnPlateau,
    SearchSpace,
    TrialConfig,
    callbacks_from_config,
    early_stop_step,
    mlp_trial_evaluator,
    plateau_step,
    random_search,
)
from ptsdpredict.training_control.search import draw_indices


def _run_early_stop(losses, patience, min_delta=0.0):
    state = EarlyStopState(patience=patience, min_delta=min_delta)
    for epoch, loss in enumerate(losses):
        state, decision = early_stop_step(state, epoch, loss, current_weights=f"weights@{epoch}")
        if decision.stop:
            return state, epoch, decision
    return state, None, None


# ---------------------------------------------------------------------------
# Early stopping
# ---------------------------------------------------------------------------
def test_early_stop_after_patience_epochs():
    state, stopped, decision = _run_early_stop([1.0, 0.9, 0.91, 0.92], patience=2)
    assert stopped == 3
    assert state.best_epoch == 1
    assert decision.restore_weights == "weights@1"


def test_early_stop_patience_one_restores_first_epoch():
    state, stopped, decision = _run_early_stop([0.5, 0.6, 0.7], patience=1)
    assert stopped == 1
    assert decision.restore_weights == "weights@0"


def test_early_stop_min_delta_counts_small_gains_as_stalls():
    state, stopped, _ = _run_early_stop([1.0, 0.99995, 0.9999], patience=2, min_delta=1e-3)
    assert stopped == 2
    assert state.best_epoch == 0


def test_early_stop_keeps_running_while_improving():
    state, stopped, _ = _run_early_stop([1.0, 0.8, 0.6, 0.4], patience=1)
    assert stopped is None
    assert state.best_loss == 0.4
    assert state.best_epoch == 3


def test_early_stopping_callback_sets_stop_flag():
    class FakeModel:
        stop_training = False

        def get_weights(self):
            return {"epoch": len(seen)}

        def set_weights(self, snapshot):
            self.restored = snapshot

    seen = []
    model = FakeModel()
    callback = EarlyStopping(patience=1, min_delta=0.0)
    callback.on_train_begin(model)
    for epoch, loss in enumerate([0.5, 0.4, 0.45]):
        seen.append(epoch)
        callback.on_epoch_end(epoch, EpochRecord(epoch, 0.0, 0.0, loss, 0.0, 0.1), model)
    callback.on_train_end(model)
    assert model.stop_training
    assert callback.stopped_epoch == 2
    assert model.restored == {"epoch": 2}


def test_early_stopping_rejects_zero_patience():
    with pytest.raises(ConfigError):
        EarlyStopping(patience=0)


# ---------------------------------------------------------------------------
# Learning-rate reduction
# ---------------------------------------------------------------------------
def test_plateau_halves_learning_rate():
    state = PlateauState(current_lr=0.1, factor=0.5, patience=1)
    state, lr = plateau_step(state, 0, 1.0)
    assert lr == 0.1
    state, lr = plateau_step(state, 1, 1.0)
    assert lr == 0.05
    assert state.epochs_since_improve == 0


def test_plateau_never_goes_below_min_lr():
    state = PlateauState(current_lr=0.1, factor=0.1, patience=1, min_lr=0.005)
    rates = []
    for epoch in range(6):
        state, lr = plateau_step(state, epoch, 1.0)
        rates.append(lr)
    assert rates == [0.1, pytest.approx(0.01), 0.005, 0.005, 0.005, 0.005]


@pytest.mark.parametrize("factor", [0.0, 1.0, 1.5])
def test_plateau_rejects_bad_factor(factor):
    with pytest.raises(ConfigError):
        PlateauState(current_lr=0.1, factor=factor)


def test_plateau_callback_updates_model_rate():
    class FakeModel:
        learning_rate = 0.2

    model = FakeModel()
    callback = ReduceLROnPlateau(factor=0.5, patience=2)
    callback.on_train_begin(model)
    for epoch, loss in enumerate([1.0, 1.0, 1.0]):
        callback.on_epoch_end(epoch, EpochRecord(epoch, 0.0, 0.0, loss, 0.0, model.learning_rate), model)
    assert model.learning_rate == 0.1


def test_callbacks_from_config():
    callbacks = callbacks_from_config(
        {"early_stopping": {"patience": 3}, "reduce_lr_on_plateau": False}
    )
    assert len(callbacks) == 1
    assert isinstance(callbacks[0], EarlyStopping)
    assert callbacks[0].patience == 3
    assert isinstance(callbacks_from_config({"reduce_lr_on_plateau": True})[0], ReduceLROnPlateau)
    assert callbacks_from_config(None) == []
    with pytest.raises(ConfigError):
        callbacks_from_config({"checkpoint": {}})
    with pytest.raises(ConfigError):
        callbacks_from_config({"early_stopping": {"wait": 3}})


# ---------------------------------------------------------------------------
# Random search
# ---------------------------------------------------------------------------
def test_search_space_size_and_decoding():
    space = SearchSpace(widths=(8, 16), dropouts=(0.2, 0.5), learning_rates=(0.1, 0.01, 0.001), n_layers=2)
    assert space.size == 2 ** 2 * 2 * 3
    configs = {space.config_at(i) for i in range(space.size)}
    assert len(configs) == space.size
    assert space.config_at(0) == TrialConfig(widths=(8, 8), dropout=0.2, learning_rate=0.1)
    assert space.config_at(1).learning_rate == 0.01
    assert space.config_at(space.size - 1) == TrialConfig(widths=(16, 16), dropout=0.5, learning_rate=0.001)


def test_search_space_validation():
    with pytest.raises(ConfigError):
        SearchSpace(widths=())
    with pytest.raises(ConfigError):
        SearchSpace(dropouts=(1.0,))
    with pytest.raises(ConfigError):
        SearchSpace.from_mapping({"depth": 3})
    space = SearchSpace.from_mapping({"widths": [32], "n_layers": 2})
    assert space.widths == (32,)
    assert space.dropouts == (0.2, 0.3, 0.5)


def test_draw_indices_are_distinct_and_capped():
    indices = draw_indices(10, 25, seed=3)
    assert sorted(indices) == list(range(10))
    assert draw_indices(1000, 5, seed=3) == draw_indices(1000, 5, seed=3)
    assert len(set(draw_indices(1000, 50, seed=4))) == 50


def _toy_score(config):
    return config.learning_rate * 10 + sum(config.widths) / 1000.0 - config.dropout


def test_random_search_finds_best_of_drawn_trials():
    space = SearchSpace(widths=(8, 16), dropouts=(0.2, 0.5), learning_rates=(0.1, 0.01), n_layers=2)
    result = random_search(space, n_trials=space.size, seed=1, evaluate=_toy_score)
    assert len(result.trials) == space.size
    assert result.best_config == TrialConfig(widths=(16, 16), dropout=0.2, learning_rate=0.1)
    assert [trial.index for trial in result.trials] == list(range(space.size))


def test_random_search_ties_go_to_earliest_trial():
    space = SearchSpace(widths=(8, 16), dropouts=(0.2,), learning_rates=(0.1,), n_layers=1)
    result = random_search(space, n_trials=2, seed=0, evaluate=lambda config: 1.0)
    assert result.best.index == 0


def test_random_search_is_independent_of_thread_count():
    space = SearchSpace(n_layers=2)
    serial = random_search(space, 8, seed=5, evaluate=_toy_score, n_jobs=1)
    threaded = random_search(space, 8, seed=5, evaluate=_toy_score, n_jobs=4)
    assert serial.log_rows() == threaded.log_rows()


def test_random_search_records_failed_trials():
    def evaluate(config):
        if config.learning_rate == 0.1:
            raise NonFiniteLoss("neural network", 0)
        return config.learning_rate

    space = SearchSpace(widths=(8,), dropouts=(0.2,), learning_rates=(0.1, 0.01), n_layers=1)
    result = random_search(space, n_trials=2, seed=0, evaluate=evaluate)
    statuses = {trial.config.learning_rate: trial.status for trial in result.trials}
    assert statuses[0.1] == "failed: NonFiniteLoss"
    assert statuses[0.01] == "ok"
    assert result.best_config.learning_rate == 0.01


def test_random_search_all_failed_reraises():
    def evaluate(config):
        raise NonFiniteLoss("neural network", 0)

    with pytest.raises(NonFiniteLoss):
        random_search(SearchSpace(n_layers=1), n_trials=3, seed=0, evaluate=evaluate)
    with pytest.raises(ConfigError):
        random_search(SearchSpace(n_layers=1), n_trials=0, seed=0, evaluate=_toy_score)


def test_trial_log_rows_are_padded_to_four_layers():
    space = SearchSpace(widths=(8,), dropouts=(0.2,), learning_rates=(0.1,), n_layers=2)
    result = random_search(space, n_trials=1, seed=0, evaluate=lambda config: 0.75)
    header, row = result.log_rows()
    assert tuple(header) == TRIAL_LOG_HEADER
    assert row == [0, 8, 8, "", "", 0.2, 0.1, "0.75", "ok"]


def test_mlp_trial_evaluator_scores_validation_accuracy():
    X, y = blobs(n_per_class=30, n_features=5, gap=3.0, seed=2)
    base = MlpHyper(batch_size=8, max_epochs=5)
    evaluate = mlp_trial_evaluator(X, y, base, seed=4)
    score = evaluate(TrialConfig(widths=(8, 4), dropout=0.2, learning_rate=0.01))
    assert 0.0 <= score <= 1.0
    assert score == evaluate(TrialConfig(widths=(8, 4), dropout=0.2, learning_rate=0.01))
    assert not math.isnan(score)
