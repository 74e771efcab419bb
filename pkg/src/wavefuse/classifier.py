"""Logistic multilayer perceptron trained online by backprop with momentum.

Loss per sample is ``0.5 * |output - target|^2`` with one-hot targets.
The epoch loop runs in ``kernels.train_epoch`` on a flat parameter vector;
the per-sample functions here (``forward``, ``compute_gradients``,
``momentum_step``) are the reference path and the public API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .docio import matrix_from_doc, matrix_to_doc, require
from .errors import DimensionMismatchError, DivergenceError, SchemaError

ACTIVATION = "logistic_sigmoid"


def sigmoid(z):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


@dataclass
class MlpNetwork:
    layer_sizes: tuple
    weights: list  # weights[j] has shape (layer_sizes[j+1], layer_sizes[j])
    biases: list
    rng_seed: int = 0
    activation: str = ACTIVATION

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> MlpNetwork:
        return MlpNetwork(tuple(self.layer_sizes), [w.copy() for w in self.weights],
                          [b.copy() for b in self.biases], self.rng_seed, self.activation)

    def to_doc(self):
        return {
            "layer_sizes": list(self.layer_sizes),
            "activation": self.activation,
            "rng_seed": self.rng_seed,
            "weights": [matrix_to_doc(w) for w in self.weights],
            "biases": [matrix_to_doc(b) for b in self.biases],
        }

    @classmethod
    def from_doc(cls, doc):
        where = "network"
        sizes = tuple(int(s) for s in require(doc, "layer_sizes", where))
        if require(doc, "activation", where) != ACTIVATION:
            raise SchemaError(f"network: unsupported activation {doc['activation']!r}")
        weights = [matrix_from_doc(w, f"network.weights[{j}]") for j, w in enumerate(require(doc, "weights", where))]
        biases = [matrix_from_doc(b, f"network.biases[{j}]") for j, b in enumerate(require(doc, "biases", where))]
        net = cls(sizes, weights, biases, int(doc.get("rng_seed", 0)))
        _check_shapes(net)
        return net


def _check_shapes(net):
    sizes = net.layer_sizes
    if len(net.weights) != len(sizes) - 1 or len(net.biases) != len(sizes) - 1:
        raise SchemaError(f"network has {len(net.weights)} weight layers for sizes {list(sizes)}")
    for j in range(len(sizes) - 1):
        if net.weights[j].shape != (sizes[j + 1], sizes[j]) or net.biases[j].shape != (sizes[j + 1],):
            raise SchemaError(f"layer {j} parameter shapes disagree with layer_sizes {list(sizes)}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    momentum: float = 0.9
    max_epochs: int = 2000
    target_mse: float = 1e-3
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.target_mse < 0:
            raise ValueError(f"target_mse must be >= 0, got {self.target_mse}")


@dataclass
class TrainReport:
    epochs_run: int = 0
    final_mse: float = float("nan")
    mse_history: list = field(default_factory=list)


def default_hidden_size(n_classes: int) -> int:
    return max(8, 2 * n_classes)


def init_network(layer_sizes, seed: int = 0) -> MlpNetwork:
    """Uniform weights in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``, zero biases."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError(f"need at least 2 layers of positive size, got {list(layer_sizes)}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        r = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-r, r, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(sizes, weights, biases, seed)


def forward(net: MlpNetwork, x):
    """Return the list of activations, input first and output last."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.n_inputs,):
        raise DimensionMismatchError(f"input length {x.size} != {net.n_inputs}")
    acts = [x]
    for W, b in zip(net.weights, net.biases):
        acts.append(sigmoid(W @ acts[-1] + b))
    return acts


def loss(net: MlpNetwork, x, target) -> float:
    err = forward(net, x)[-1] - np.asarray(target, dtype=np.float64)
    return 0.5 * float(err @ err)


def compute_gradients(net: MlpNetwork, x, target):
    """Backpropagated gradients of the squared-error loss.

    Returns ``(weight_grads, bias_grads, loss)``.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (net.n_outputs,):
        raise DimensionMismatchError(f"target length {target.size} != {net.n_outputs}")
    acts = forward(net, x)
    out = acts[-1]
    err = out - target
    delta = err * out * (1.0 - out)
    n_layers = len(net.weights)
    gw, gb = [None] * n_layers, [None] * n_layers
    for j in range(n_layers - 1, -1, -1):
        gw[j] = np.outer(delta, acts[j])
        gb[j] = delta
        if j:
            a = acts[j]
            delta = (net.weights[j].T @ delta) * a * (1.0 - a)
    return gw, gb, 0.5 * float(err @ err)


def momentum_step(net: MlpNetwork, velocity, grads, lr: float, momentum: float):
    """Apply ``v <- -lr*g + momentum*v`` then ``theta <- theta + v`` in place.

    ``velocity`` and ``grads`` are ``(weight_list, bias_list)`` pairs.
    """
    for params, vel, g in ((net.weights, velocity[0], grads[0]), (net.biases, velocity[1], grads[1])):
        for j in range(len(params)):
            vel[j][...] = -lr * g[j] + momentum * vel[j]
            params[j] += vel[j]
    return velocity


def pack(net: MlpNetwork) -> np.ndarray:
    """Flatten parameters as W_0, b_0, W_1, b_1, ... (row-major)."""
    parts = []
    for W, b in zip(net.weights, net.biases):
        parts.append(W.reshape(-1))
        parts.append(b)
    return np.concatenate(parts)


def unpack(flat, net: MlpNetwork) -> MlpNetwork:
    out = net.copy()
    pos = 0
    for j, W in enumerate(out.weights):
        W[...] = flat[pos:pos + W.size].reshape(W.shape)
        pos += W.size
        out.biases[j][...] = flat[pos:pos + out.biases[j].size]
        pos += out.biases[j].size
    return out


def one_hot(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    t = np.zeros((labels.size, n_classes))
    t[np.arange(labels.size), labels] = 1.0
    return t


def train(net: MlpNetwork, features, targets, cfg: TrainConfig | None = None):
    """Online training with per-epoch shuffling.

    Epoch MSE is the squared output error averaged over samples and output
    units, accumulated during the pass. Training stops after ``max_epochs``
    or once the epoch MSE reaches ``target_mse``. Returns a new network and
    a ``TrainReport``; the input network is left untouched.
    """
    cfg = cfg or TrainConfig()
    X = np.ascontiguousarray(features, dtype=np.float64)
    T = np.ascontiguousarray(targets, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty N x n_inputs feature matrix")
    if X.shape[1] != net.n_inputs or T.shape != (X.shape[0], net.n_outputs):
        raise DimensionMismatchError(
            f"features {X.shape} / targets {T.shape} do not fit layer sizes {list(net.layer_sizes)}")

    params = pack(net)
    velocity = np.zeros_like(params)
    sizes = np.asarray(net.layer_sizes, dtype=np.int64)
    rng = np.random.default_rng(cfg.shuffle_seed)
    denom = X.shape[0] * net.n_outputs
    report = TrainReport(epochs_run=0)
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(X.shape[0]).astype(np.int64)
        sse = kernels.train_epoch(params, velocity, sizes, X, T, order,
                                  float(cfg.learning_rate), float(cfg.momentum))
        if not np.all(np.isfinite(params)):
            raise DivergenceError(epoch)
        mse = sse / denom
        report.mse_history.append(float(mse))
        report.epochs_run = epoch
        report.final_mse = float(mse)
        if mse <= cfg.target_mse:
            break
    return unpack(params, net), report


def classify(net: MlpNetwork, x):
    """Return ``(class_index, scores)``; ties go to the lowest index."""
    scores = forward(net, x)[-1]
    return int(np.argmax(scores)), scores


def predict(net: MlpNetwork, features) -> np.ndarray:
    """Vectorized ``classify`` over the rows of ``features``."""
    A = np.asarray(features, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] != net.n_inputs:
        raise DimensionMismatchError(f"features {A.shape} do not match {net.n_inputs} inputs")
    for W, b in zip(net.weights, net.biases):
        A = sigmoid(A @ W.T + b)
    return np.argmax(A, axis=1)
