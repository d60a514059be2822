import numpy as np
import pytest

from conftest import blobs

from ptsdpredict.errors import BatchTooSmall, ConfigError
from ptsdpredict.learners import MlpHyper, MlpModel, fit_mlp, mlp_backward, mlp_forward
from ptsdpredict.learners.base import log_loss_from_logits
from ptsdpredict.learners.mlp import INFER, TRAIN, minibatches, mlp_loss
from ptsdpredict.preprocess import stratified_split
from ptsdpredict.training_control import EarlyStopping, ReduceLROnPlateau
from ptsdpredict.utils.seeding import derive_seed


def _small_network(seed=0, widths=(8, 4), dropout=0.0):
    hyper = MlpHyper(hidden_widths=widths, dropout=dropout, batch_size=8, max_epochs=5)
    return MlpModel(hyper).initialise(7, np.random.default_rng(seed))


def test_backward_matches_finite_differences():
    """Analytic gradients of every parameter, batch norm included."""
    rng = np.random.default_rng(1)
    model = _small_network()
    # Non-trivial batch-norm parameters
    model.gamma = [rng.uniform(0.5, 1.5, size=g.shape) for g in model.gamma]
    model.beta = [rng.normal(0.0, 0.1, size=b.shape) for b in model.beta]
    X = rng.normal(size=(16, 7))
    y = rng.integers(0, 2, size=16)

    _, cache = mlp_forward(model, X, TRAIN, update_stats=False)
    grads = mlp_backward(model, cache, y).flat()
    eps = 1e-6
    checked = 0
    for param, grad in zip(model.parameters(), grads):
        assert param.shape == grad.shape
        flat, flat_grad = param.reshape(-1), grad.reshape(-1)
        for index in range(flat.size):
            original = flat[index]
            flat[index] = original + eps
            plus = mlp_loss(model, X, y)
            flat[index] = original - eps
            minus = mlp_loss(model, X, y)
            flat[index] = original
            numeric = (plus - minus) / (2 * eps)
            analytic = flat_grad[index]
            # Biases feeding a batch-norm layer have zero gradient
            assert abs(numeric - analytic) <= 1e-4 * max(abs(numeric), abs(analytic)) + 1e-8
            checked += 1
    assert checked == sum(param.size for param in model.parameters())


def test_zero_weights_predict_one_half():
    model = _small_network()
    model.weights = [np.zeros_like(w) for w in model.weights]
    model.biases = [np.zeros_like(b) for b in model.biases]
    proba, _ = mlp_forward(model, np.random.default_rng(2).normal(size=(5, 7)), INFER)
    assert np.all(proba == 0.5)


def test_infer_mode_is_row_independent():
    model = _small_network(dropout=0.5)
    X = np.random.default_rng(3).normal(size=(6, 7))
    together = mlp_forward(model, X, INFER)[0]
    one_by_one = np.concatenate([mlp_forward(model, X[i:i + 1], INFER)[0] for i in range(6)])
    assert np.allclose(together, one_by_one)


def test_train_mode_with_matching_running_stats_equals_infer():
    """Without dropout, train and infer agree once the running stats equal the batch stats."""
    model = _small_network()
    model.hyper = MlpHyper(hidden_widths=(8, 4), dropout=0.0, bn_momentum=0.0, bn_eps=1e-5)
    X = np.random.default_rng(4).normal(size=(12, 7))
    train_proba, _ = mlp_forward(model, X, TRAIN, update_stats=True)
    infer_proba, _ = mlp_forward(model, X, INFER)
    assert np.allclose(train_proba, infer_proba)


def test_train_mode_updates_running_stats_only_when_asked():
    model = _small_network()
    before = [m.copy() for m in model.running_mean]
    X = np.random.default_rng(5).normal(size=(10, 7))
    mlp_forward(model, X, TRAIN, update_stats=False)
    assert all(np.array_equal(a, b) for a, b in zip(before, model.running_mean))
    mlp_forward(model, X, TRAIN)
    assert not all(np.array_equal(a, b) for a, b in zip(before, model.running_mean))


def test_single_row_train_batch_is_rejected():
    model = _small_network()
    with pytest.raises(BatchTooSmall):
        mlp_forward(model, np.zeros((1, 7)), TRAIN)


def test_dropout_needs_generator():
    model = _small_network(dropout=0.3)
    with pytest.raises(ValueError):
        mlp_forward(model, np.zeros((4, 7)), TRAIN)


def test_minibatches_merge_trailing_single_row():
    batches = minibatches(np.arange(9), 4)
    assert [b.tolist() for b in batches] == [[0, 1, 2, 3], [4, 5, 6, 7, 8]]
    assert [b.size for b in minibatches(np.arange(10), 4)] == [4, 4, 2]


@pytest.mark.parametrize(
    "params",
    [
        {"hidden_widths": ()},
        {"dropout": 1.0},
        {"batch_size": 1},
        {"optimizer": "rmsprop"},
        {"validation_fraction": 1.0},
    ],
)
def test_invalid_hyperparameters(params):
    with pytest.raises(ConfigError):
        MlpHyper(**params).check()


@pytest.mark.parametrize("optimizer", ["sgd", "adam"])
def test_training_learns_separable_data(optimizer):
    X, y = blobs(n_per_class=60, n_features=7, gap=2.0, seed=6)
    hyper = MlpHyper(
        hidden_widths=(16, 8),
        dropout=0.1,
        batch_size=16,
        max_epochs=30,
        learning_rate=0.01,
        optimizer=optimizer,
    )
    model, history = fit_mlp(X, y, hyper, seed=1)
    assert len(history) == 30
    assert history.column("epoch") == list(range(30))
    assert history.records[-1].val_acc >= 0.9
    assert np.mean(model.predict(X) == y) >= 0.9


def test_training_is_deterministic():
    X, y = blobs(n_per_class=30, n_features=7, seed=7)
    hyper = MlpHyper(hidden_widths=(8, 4), max_epochs=4, batch_size=8)
    first, _ = fit_mlp(X, y, hyper, seed=9)
    second, _ = fit_mlp(X, y, hyper, seed=9)
    assert np.array_equal(first.predict_proba(X), second.predict_proba(X))


def test_early_stopping_restores_best_epoch_weights():
    X, y = blobs(n_per_class=40, n_features=7, gap=1.0, seed=8)
    hyper = MlpHyper(hidden_widths=(8,), dropout=0.0, batch_size=8, max_epochs=20, learning_rate=0.05)
    stopper = EarlyStopping(patience=1, min_delta=0.0)
    model, history = fit_mlp(X, y, hyper, callbacks=[stopper], seed=2)
    best = history.best_epoch()
    assert stopper.state.best_epoch == best
    if stopper.stopped_epoch is not None:
        assert stopper.stopped_epoch == len(history) - 1 == best + 1

    holdout = stratified_split(y, hyper.validation_fraction, derive_seed(2, "validation"))
    val_rows = list(holdout.test_rows)
    _, cache = mlp_forward(model, X[val_rows], INFER)
    restored_loss = log_loss_from_logits(cache.logits, y[val_rows])
    assert restored_loss == pytest.approx(history.records[best].val_loss, rel=1e-12)


def test_plateau_reduces_learning_rate_in_history():
    X, y = blobs(n_per_class=30, n_features=7, gap=0.0, seed=10)
    hyper = MlpHyper(hidden_widths=(4,), dropout=0.0, batch_size=8, max_epochs=12, learning_rate=0.1)
    plateau = ReduceLROnPlateau(factor=0.5, patience=1, min_lr=0.01)
    _, history = fit_mlp(X, y, hyper, callbacks=[plateau], seed=3)
    rates = history.column("lr")
    assert rates[0] == 0.1
    assert all(b <= a for a, b in zip(rates, rates[1:]))
    assert min(rates) >= 0.01
