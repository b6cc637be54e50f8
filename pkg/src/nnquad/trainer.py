"""Deterministic small-scale SGD trainer with MSE loss.

Single-threaded on purpose: reproducibility outranks speed at this scale.
Given the same config (seed included) the trained network serializes to
identical bytes on every run.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StructureError, TrainingDivergedError
from .network import DenseLayer, Network


@dataclass
class TrainConfig:
    layer_widths: tuple
    epochs: int
    learning_rate: float
    batch_size: int
    activation: str = "relu"
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        self.layer_widths = tuple(int(w) for w in self.layer_widths)
        self.epochs = int(self.epochs)
        self.batch_size = int(self.batch_size)
        self.learning_rate = float(self.learning_rate)
        self.seed = int(self.seed)
        self.shuffle = bool(self.shuffle)
        if len(self.layer_widths) < 2 or any(w < 1 for w in self.layer_widths):
            raise StructureError(
                f"layer_widths needs at least input and output widths >= 1, got {self.layer_widths}"
            )
        if self.epochs < 0:
            raise StructureError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise StructureError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise StructureError(f"batch size must be >= 1, got {self.batch_size}")
        if self.activation not in ("relu", "tanh"):
            raise StructureError(
                f"trainer supports 'relu' or 'tanh' hidden activations, got '{self.activation}'"
            )


def train_config_from_dict(doc: dict) -> TrainConfig:
    """Build a TrainConfig from its JSON mirror (field names match)."""
    if not isinstance(doc, dict):
        raise StructureError("train config must be a JSON object")
    required = ("layer_widths", "epochs", "learning_rate", "batch_size")
    for key in required:
        if key not in doc:
            raise StructureError(f"train config missing key '{key}'")
    known = set(required) | {"activation", "seed", "shuffle"}
    unknown = set(doc) - known
    if unknown:
        raise StructureError(f"train config has unknown keys: {sorted(unknown)}")
    return TrainConfig(**doc)


@dataclass
class Dataset:
    """Input/target pairs as row-stacked arrays; 1-D inputs get a width-1 axis."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        self.xs = np.atleast_1d(np.asarray(self.xs, dtype=np.float64))
        self.ys = np.atleast_1d(np.asarray(self.ys, dtype=np.float64))
        if self.xs.ndim == 1:
            self.xs = self.xs[:, None]
        if self.ys.ndim == 1:
            self.ys = self.ys[:, None]
        if self.xs.shape[0] == 0:
            raise ShapeError("dataset must not be empty")
        if self.xs.shape[0] != self.ys.shape[0]:
            raise ShapeError(
                f"dataset has {self.xs.shape[0]} inputs but {self.ys.shape[0]} targets"
            )

    @property
    def size(self):
        return self.xs.shape[0]

    @property
    def input_dim(self):
        return self.xs.shape[1]

    @property
    def output_dim(self):
        return self.ys.shape[1]


def mse_loss(pred, target) -> float:
    """Mean over samples of the squared distance, averaged over output width."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"prediction shape {p.shape} does not match target shape {t.shape}")
    with np.errstate(over="ignore"):  # divergence detection wants the inf, not a warning
        return float(np.mean((p - t) ** 2))


def _init_network(cfg: TrainConfig, rng) -> Network:
    # uniform +-1/sqrt(fan_in) keeps activations O(1) at width 100
    layers = []
    widths = cfg.layer_widths
    for i in range(1, len(widths)):
        scale = 1.0 / math.sqrt(widths[i - 1])
        weight = rng.uniform(-scale, scale, size=(widths[i], widths[i - 1]))
        bias = rng.uniform(-scale, scale, size=widths[i])
        tag = cfg.activation if i < len(widths) - 1 else "identity"
        layers.append(DenseLayer(weight, bias, tag))
    return Network(widths[0], layers)


def _forward_pass(layers, x):
    pres = []
    posts = [x]
    a = x
    for layer in layers:
        z = a @ layer.weight.T + layer.bias
        pres.append(z)
        if layer.activation == "relu":
            a = np.maximum(z, 0.0)
        elif layer.activation == "tanh":
            a = np.tanh(z)
        else:
            a = z
        posts.append(a)
    return pres, posts


def _backprop(layers, x, y):
    """Gradients of mse_loss(forward(x), y) for each layer's (weight, bias)."""
    pres, posts = _forward_pass(layers, x)
    batch, out_dim = y.shape
    grad = 2.0 * (posts[-1] - y) / (batch * out_dim)  # final layer is affine
    grads = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        grads[i] = (grad.T @ posts[i], grad.sum(axis=0))
        if i > 0:
            grad = grad @ layers[i].weight
            if layers[i - 1].activation == "relu":
                grad = grad * (pres[i - 1] > 0.0)
            elif layers[i - 1].activation == "tanh":
                grad = grad * (1.0 - posts[i] ** 2)
    return grads


def train(cfg: TrainConfig, data: Dataset, on_epoch=None) -> Network:
    """Plain SGD (no momentum, no decay) from the seeded initialization.

    A trailing short batch is kept.  ``on_epoch(epoch, loss)`` is invoked with
    the full-dataset loss, starting at epoch 0 (the initialization).
    """
    if data.input_dim != cfg.layer_widths[0]:
        raise ShapeError(
            f"dataset input width {data.input_dim} does not match layer_widths[0]="
            f"{cfg.layer_widths[0]}"
        )
    if data.output_dim != cfg.layer_widths[-1]:
        raise ShapeError(
            f"dataset output width {data.output_dim} does not match layer_widths[-1]="
            f"{cfg.layer_widths[-1]}"
        )
    rng = np.random.default_rng(cfg.seed)
    net = _init_network(cfg, rng)
    layers = net.layers
    n = data.size

    def full_loss():
        _, posts = _forward_pass(layers, data.xs)
        return mse_loss(posts[-1], data.ys)

    loss = full_loss()
    if on_epoch is not None:
        on_epoch(0, loss)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            grads = _backprop(layers, data.xs[idx], data.ys[idx])
            for layer, (gw, gb) in zip(layers, grads):
                layer.weight -= cfg.learning_rate * gw
                layer.bias -= cfg.learning_rate * gb
        loss = full_loss()
        if not math.isfinite(loss):
            raise TrainingDivergedError(
                f"training loss became non-finite at epoch {epoch}", epoch=epoch
            )
        if on_epoch is not None:
            on_epoch(epoch, loss)
    return net


def gradient_check(net: Network, data: Dataset) -> float:
    """Max relative deviation between backprop and central finite differences.

    Intended for small dense networks (a few hundred parameters).  The
    relative scale falls back to absolute when both gradients are below 1e-8,
    so exact zero-gradient points report zero deviation.
    """
    layers = net.layers
    if not all(isinstance(l, DenseLayer) for l in layers):
        raise StructureError("gradient_check supports dense-only networks")
    analytic = _backprop(layers, data.xs, data.ys)

    def loss_now():
        _, posts = _forward_pass(layers, data.xs)
        return mse_loss(posts[-1], data.ys)

    step = 1e-6
    worst = 0.0
    for layer, (gw, gb) in zip(layers, analytic):
        for arr, grad in ((layer.weight, gw), (layer.bias, gb)):
            flat = arr.reshape(-1)
            gflat = np.asarray(grad).reshape(-1)
            for k in range(flat.shape[0]):
                keep = flat[k]
                flat[k] = keep + step
                up = loss_now()
                flat[k] = keep - step
                down = loss_now()
                flat[k] = keep
                fd = (up - down) / (2.0 * step)
                scale = max(abs(gflat[k]), abs(fd))
                if scale < 1e-8:
                    worst = max(worst, abs(gflat[k] - fd))
                else:
                    worst = max(worst, abs(gflat[k] - fd) / scale)
    return worst
