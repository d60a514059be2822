"""
The customised feed-forward network.

Every hidden layer is affine -> batch norm -> ReLU -> inverted dropout; the
output layer is a single affine unit followed by a sigmoid. Train mode
normalises with batch statistics and drops units; infer mode uses the running
statistics and is deterministic.
"""

import copy
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ptsdpredict.errors import BatchTooSmall, ConfigError, NonFiniteLoss
from ptsdpredict.learners.base import (
    Classifier,
    as_matrix,
    check_training_data,
    log_loss_from_logits,
    sigmoid,
)
from ptsdpredict.learners.history import EpochRecord, TrainingHistory
from ptsdpredict.preprocess.split import stratified_split
from ptsdpredict.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

TRAIN = "train"
INFER = "infer"
OPTIMIZERS = ("sgd", "adam")


@dataclass(frozen=True)
class MlpHyper:
    hidden_widths: Tuple[int, ...] = (1024, 512, 256, 128)
    dropout: float = 0.3
    batch_size: int = 32
    max_epochs: int = 100
    learning_rate: float = 1e-3
    optimizer: str = "sgd"
    momentum: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    validation_fraction: float = 0.1
    bn_momentum: float = 0.9
    bn_eps: float = 1e-5

    def check(self):
        if not self.hidden_widths or any(int(w) < 1 for w in self.hidden_widths):
            raise ConfigError(f"Hidden widths must be positive, got {self.hidden_widths}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"Dropout must be in [0, 1), got {self.dropout}")
        if self.batch_size < 2:
            raise ConfigError(f"Batch size must be at least 2, got {self.batch_size}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"Unknown optimizer {self.optimizer!r}, expected one of {OPTIMIZERS}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigError(
                f"Validation fraction must be in [0, 1), got {self.validation_fraction}"
            )


@dataclass
class LayerCache:
    inputs: np.ndarray
    xhat: np.ndarray
    inv_std: np.ndarray
    batch_mean: np.ndarray
    batch_var: np.ndarray
    activation: np.ndarray
    dropout_mask: np.ndarray = None


@dataclass
class ForwardCache:
    layers: List[LayerCache]
    last_hidden: np.ndarray
    logits: np.ndarray


@dataclass
class Gradients:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    gamma: List[np.ndarray]
    beta: List[np.ndarray]

    def flat(self) -> List[np.ndarray]:
        return _interleave(self.weights, self.biases, self.gamma, self.beta)


def _interleave(weights, biases, gamma, beta):
    out = []
    for layer in range(len(gamma)):
        out.extend([weights[layer], biases[layer], gamma[layer], beta[layer]])
    out.extend([weights[-1], biases[-1]])
    return out


class MlpModel(Classifier):
    """Batch-normalised ReLU network with a sigmoid output unit."""

    kind = "mlp"
    hyper_class = MlpHyper

    def __init__(self, hyper: MlpHyper = None):
        super().__init__(hyper or MlpHyper())
        self.hyper.check()
        self.weights = []
        self.biases = []
        self.gamma = []
        self.beta = []
        self.running_mean = []
        self.running_var = []
        self.history = TrainingHistory()
        self.learning_rate = self.hyper.learning_rate
        self.stop_training = False

    @property
    def widths(self) -> List[int]:
        return [self.n_features_, *self.hyper.hidden_widths, 1]

    def initialise(self, n_features: int, rng) -> "MlpModel":
        """He-uniform hidden layers, Xavier-uniform output layer, unit batch norm."""
        self.n_features_ = int(n_features)
        widths = self.widths
        self.weights, self.biases = [], []
        for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            if layer < len(widths) - 2:
                limit = np.sqrt(6.0 / fan_in)
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        hidden = self.hyper.hidden_widths
        self.gamma = [np.ones(w) for w in hidden]
        self.beta = [np.zeros(w) for w in hidden]
        self.running_mean = [np.zeros(w) for w in hidden]
        self.running_var = [np.ones(w) for w in hidden]
        return self

    def parameters(self) -> List[np.ndarray]:
        """Trainable arrays in a fixed order matching ``Gradients.flat``."""
        return _interleave(self.weights, self.biases, self.gamma, self.beta)

    def get_weights(self) -> dict:
        return copy.deepcopy(
            {
                "weights": self.weights,
                "biases": self.biases,
                "gamma": self.gamma,
                "beta": self.beta,
                "running_mean": self.running_mean,
                "running_var": self.running_var,
            }
        )

    def set_weights(self, snapshot: dict):
        snapshot = copy.deepcopy(snapshot)
        self.weights = snapshot["weights"]
        self.biases = snapshot["biases"]
        self.gamma = snapshot["gamma"]
        self.beta = snapshot["beta"]
        self.running_mean = snapshot["running_mean"]
        self.running_var = snapshot["running_var"]

    def fit(self, X, y, seed: int = 0, callbacks: Sequence = ()) -> "MlpModel":
        train_network(self, X, y, seed=seed, callbacks=callbacks)
        return self

    def _predict_proba(self, X):
        return mlp_forward(self, X, INFER)[0]

    def _params_to_dict(self):
        return {
            name: [array.tolist() for array in arrays]
            for name, arrays in self.get_weights().items()
        }

    def _params_from_dict(self, document):
        self.set_weights(
            {
                name: [np.asarray(array, dtype=np.float64) for array in document[name]]
                for name in ("weights", "biases", "gamma", "beta", "running_mean", "running_var")
            }
        )


def mlp_forward(model: MlpModel, X, mode: str = INFER, rng=None, update_stats: bool = True):
    """
    Forward pass.

    Args:
        model: initialised network
        X: (n, d) feature matrix
        mode: ``"train"`` (batch statistics, dropout) or ``"infer"``
        rng: numpy Generator for the dropout masks (train mode, dropout > 0)
        update_stats: in train mode, fold the batch statistics into the running ones

    Returns:
        tuple: (class-1 probabilities, ForwardCache)
    """
    if mode not in (TRAIN, INFER):
        raise ValueError(f"Unknown mode {mode!r}")
    activation = as_matrix(X)
    if mode == TRAIN and activation.shape[0] < 2:
        raise BatchTooSmall(activation.shape[0])
    hyper = model.hyper
    drop = hyper.dropout if mode == TRAIN else 0.0
    if drop > 0.0 and rng is None:
        raise ValueError("Train-mode dropout needs a random generator")

    layers = []
    for layer in range(len(model.gamma)):
        inputs = activation
        z = inputs @ model.weights[layer] + model.biases[layer]
        if mode == TRAIN:
            mean = z.mean(axis=0)
            var = z.var(axis=0)
            if update_stats:
                m = hyper.bn_momentum
                model.running_mean[layer] = m * model.running_mean[layer] + (1.0 - m) * mean
                model.running_var[layer] = m * model.running_var[layer] + (1.0 - m) * var
        else:
            mean = model.running_mean[layer]
            var = model.running_var[layer]
        inv_std = 1.0 / np.sqrt(var + hyper.bn_eps)
        xhat = (z - mean) * inv_std
        activation = np.maximum(model.gamma[layer] * xhat + model.beta[layer], 0.0)
        mask = None
        if drop > 0.0:
            mask = (rng.random(activation.shape) >= drop) / (1.0 - drop)
            activation = activation * mask
        layers.append(LayerCache(inputs, xhat, inv_std, mean, var, activation, mask))

    logits = (activation @ model.weights[-1] + model.biases[-1])[:, 0]
    return sigmoid(logits), ForwardCache(layers, activation, logits)


def mlp_backward(model: MlpModel, cache: ForwardCache, y) -> Gradients:
    """Gradients of the mean binary cross-entropy for a train-mode forward pass."""
    n = cache.logits.shape[0]
    d_logits = ((sigmoid(cache.logits) - y) / n)[:, None]
    n_hidden = len(cache.layers)
    d_weights = [None] * (n_hidden + 1)
    d_biases = [None] * (n_hidden + 1)
    d_gamma = [None] * n_hidden
    d_beta = [None] * n_hidden

    d_weights[-1] = cache.last_hidden.T @ d_logits
    d_biases[-1] = d_logits.sum(axis=0)
    d_activation = d_logits @ model.weights[-1].T

    for layer in reversed(range(n_hidden)):
        layer_cache = cache.layers[layer]
        if layer_cache.dropout_mask is not None:
            d_activation = d_activation * layer_cache.dropout_mask
        d_bn = d_activation * (layer_cache.activation > 0.0)
        d_gamma[layer] = np.sum(d_bn * layer_cache.xhat, axis=0)
        d_beta[layer] = np.sum(d_bn, axis=0)
        d_xhat = d_bn * model.gamma[layer]
        d_z = (layer_cache.inv_std / n) * (
            n * d_xhat
            - d_xhat.sum(axis=0)
            - layer_cache.xhat * np.sum(d_xhat * layer_cache.xhat, axis=0)
        )
        d_weights[layer] = layer_cache.inputs.T @ d_z
        d_biases[layer] = d_z.sum(axis=0)
        d_activation = d_z @ model.weights[layer].T
    return Gradients(d_weights, d_biases, d_gamma, d_beta)


def mlp_loss(model: MlpModel, X, y, mode: str = TRAIN, rng=None) -> float:
    """Mean binary cross-entropy without touching the running statistics."""
    _, cache = mlp_forward(model, X, mode, rng=rng, update_stats=False)
    return log_loss_from_logits(cache.logits, y)


class SgdMomentum:
    def __init__(self, momentum: float):
        self.momentum = momentum
        self.velocity = None

    def step(self, params, grads, lr):
        if self.velocity is None:
            self.velocity = [np.zeros_like(p) for p in params]
        for param, grad, velocity in zip(params, grads, self.velocity):
            velocity *= self.momentum
            velocity -= lr * grad
            param += velocity


class Adam:
    def __init__(self, beta1: float, beta2: float, eps: float):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params, grads, lr):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for param, grad, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            param -= lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def make_optimizer(hyper: MlpHyper):
    if hyper.optimizer == "adam":
        # momentum doubles as the first-moment decay
        return Adam(hyper.momentum, hyper.beta2, hyper.adam_eps)
    return SgdMomentum(hyper.momentum)


def minibatches(order: np.ndarray, batch_size: int) -> List[np.ndarray]:
    """Split ``order`` into batches; a trailing single row joins the previous batch."""
    batches = [order[i:i + batch_size] for i in range(0, order.size, batch_size)]
    if len(batches) > 1 and batches[-1].size == 1:
        batches[-2] = np.concatenate([batches[-2], batches[-1]])
        batches.pop()
    return batches


def _evaluate(model, X, y) -> Tuple[float, float]:
    proba, cache = mlp_forward(model, X, INFER)
    loss = log_loss_from_logits(cache.logits, y)
    accuracy = float(np.mean((proba >= 0.5) == (y == 1)))
    return loss, accuracy


def _call(callbacks, hook, *args):
    for callback in callbacks:
        getattr(callback, hook)(*args)


def train_network(model: MlpModel, X, y, seed: int = 0, callbacks: Sequence = ()) -> TrainingHistory:
    """Mini-batch training loop shared by ``MlpModel.fit`` and ``fit_mlp``."""
    X, y = check_training_data(X, y)
    hyper = model.hyper
    callbacks = list(callbacks or ())

    if hyper.validation_fraction > 0.0:
        holdout = stratified_split(y, hyper.validation_fraction, derive_seed(seed, "validation"))
        train_rows = np.asarray(holdout.train_rows)
        val_rows = np.asarray(holdout.test_rows)
    else:
        train_rows = val_rows = np.arange(y.size)
    X_train, y_train = X[train_rows], y[train_rows]
    X_val, y_val = X[val_rows], y[val_rows]

    model.initialise(X.shape[1], np.random.default_rng(derive_seed(seed, "init")))
    model.history = TrainingHistory()
    model.learning_rate = hyper.learning_rate
    model.stop_training = False
    optimizer = make_optimizer(hyper)
    shuffle_rng = np.random.default_rng(derive_seed(seed, "shuffle"))
    dropout_rng = np.random.default_rng(derive_seed(seed, "dropout"))

    logger.debug(
        f"Training network {model.widths} on {y_train.size} rows, validating on {y_val.size}"
    )
    _call(callbacks, "on_train_begin", model)
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(hyper.max_epochs):
            lr = model.learning_rate
            loss_sum, correct = 0.0, 0
            for batch in minibatches(shuffle_rng.permutation(y_train.size), hyper.batch_size):
                proba, cache = mlp_forward(model, X_train[batch], TRAIN, rng=dropout_rng)
                loss = log_loss_from_logits(cache.logits, y_train[batch])
                if not np.isfinite(loss):
                    raise NonFiniteLoss("neural network", epoch)
                grads = mlp_backward(model, cache, y_train[batch])
                optimizer.step(model.parameters(), grads.flat(), lr)
                loss_sum += loss * batch.size
                correct += int(np.sum((proba >= 0.5) == (y_train[batch] == 1)))

            if not all(np.all(np.isfinite(p)) for p in model.parameters()):
                raise NonFiniteLoss("neural network", epoch)
            val_loss, val_acc = _evaluate(model, X_val, y_val)
            record = EpochRecord(
                epoch=epoch,
                train_loss=loss_sum / y_train.size,
                train_acc=correct / y_train.size,
                val_loss=val_loss,
                val_acc=val_acc,
                lr=lr,
            )
            model.history.append(record)
            logger.debug(
                f"epoch {epoch}: loss {record.train_loss:.4f} acc {record.train_acc:.4f} "
                f"val_loss {val_loss:.4f} val_acc {val_acc:.4f} lr {lr:g}"
            )
            _call(callbacks, "on_epoch_end", epoch, record, model)
            if model.stop_training:
                break
    _call(callbacks, "on_train_end", model)
    return model.history


def fit_mlp(X, y, hyper: MlpHyper = None, callbacks: Sequence = (), seed: int = 0):
    """
    Train a network and return it together with its per-epoch history.

    Returns:
        tuple: (MlpModel, TrainingHistory)
    """
    model = MlpModel(hyper)
    history = train_network(model, X, y, seed=seed, callbacks=callbacks)
    return model, history
