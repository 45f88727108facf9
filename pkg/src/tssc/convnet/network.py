"""Sequential container, loss, optimisers and the training loop."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..exceptions import ConfigError, NumericError, ShapeError, TrainingError
from .layers import (BatchNorm, Conv2D, Dense, Flatten, GlobalAvgPool, Layer, MaxPool, ReLU,
                     layer_from_descriptor)

N_CLASSES = 9


class Sequential:
    def __init__(self, layers: Iterable[Layer], input_shape, seed: int = 0):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        rng = np.random.default_rng(seed)
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.build(shape, rng)
        self.output_shape = shape

    @property
    def n_classes(self) -> int:
        return self.output_shape[0]

    def architecture(self) -> dict:
        return {"input_shape": list(self.input_shape),
                "layers": [layer.descriptor() for layer in self.layers]}

    @classmethod
    def from_architecture(cls, arch: dict, seed: int = 0) -> "Sequential":
        return cls([layer_from_descriptor(d) for d in arch["layers"]], arch["input_shape"], seed)

    def forward(self, x, training=False):
        if tuple(x.shape[1:]) != self.input_shape:
            raise ShapeError(f"model expects inputs of shape {self.input_shape}, got {x.shape[1:]}")
        for i, layer in enumerate(self.layers):
            # Overflow is reported below as a NumericError.
            with np.errstate(over="ignore", invalid="ignore"):
                x = layer.forward(x, training)
            if not np.all(np.isfinite(x)):
                raise NumericError(f"non-finite activation after layer {i} ({layer!r})")
        return x

    def backward(self, dlogits):
        g = dlogits
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return g

    def parameters(self):
        """``(layer index, name, array)`` for every trainable array, in a fixed order."""
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield i, name, layer.params[name]

    def buffers(self):
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.buffers):
                yield i, name, layer.buffers[name]

    def gradients(self):
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield i, name, layer.grads[name]

    def state(self) -> list[np.ndarray]:
        """Copies of every parameter followed by every buffer."""
        return [a.copy() for *_, a in self.parameters()] + [a.copy() for *_, a in self.buffers()]

    def load_state(self, arrays):
        arrays = list(arrays)
        slots = [(l, n, False) for l, n, _ in self.parameters()] + \
                [(l, n, True) for l, n, _ in self.buffers()]
        if len(arrays) != len(slots):
            raise ShapeError(f"state has {len(arrays)} arrays, model needs {len(slots)}")
        for (i, name, is_buf), arr in zip(slots, arrays):
            store = self.layers[i].buffers if is_buf else self.layers[i].params
            if store[name].shape != np.shape(arr):
                raise ShapeError(f"layer {i} {name}: shape {np.shape(arr)} != {store[name].shape}")
            store[name] = np.array(arr, dtype=float)


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch; returns ``(loss, probs, dlogits)``."""
    logits = np.atleast_2d(np.asarray(logits, dtype=float))
    labels = np.atleast_1d(np.asarray(labels))
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    log_p = z - log_norm[:, None]
    probs = np.exp(log_p)
    loss = float(-log_p[np.arange(n), labels].mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    return max(loss, 0.0), probs, dlogits / n


class Adam:
    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict = {}
        self.v: dict = {}

    def step(self, model: Sequential):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        corr1 = 1 - b1 ** self.t
        corr2 = 1 - b2 ** self.t
        for (i, name, p), (_, _, g) in zip(model.parameters(), model.gradients()):
            key = (i, name)
            m = self.m.get(key, 0.0) * b1 + (1 - b1) * g
            v = self.v.get(key, 0.0) * b2 + (1 - b2) * g * g
            self.m[key], self.v[key] = m, v
            p -= self.lr * (m / corr1) / (np.sqrt(v / corr2) + self.eps)


class SGDMomentum:
    def __init__(self, lr=1e-2, momentum=0.9):
        self.lr, self.momentum = lr, momentum
        self.velocity: dict = {}

    def step(self, model: Sequential):
        for (i, name, p), (_, _, g) in zip(model.parameters(), model.gradients()):
            vel = self.momentum * self.velocity.get((i, name), 0.0) - self.lr * g
            self.velocity[(i, name)] = vel
            p += vel


def make_optimizer(name: str, lr: float):
    if name == "adam":
        return Adam(lr)
    if name == "sgd_momentum":
        return SGDMomentum(lr)
    raise ConfigError(f"unknown optimizer {name!r}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    validation_fraction: float = 0.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not 0 <= self.validation_fraction < 1:
            raise ConfigError("validation_fraction must lie in [0, 1)")


def predict_logits(model: Sequential, X, batch_size=256) -> np.ndarray:
    out = [model.forward(X[s:s + batch_size], training=False) for s in range(0, len(X), batch_size)]
    return np.concatenate(out) if out else np.empty((0, model.n_classes))


def confusion_matrix(y_true, y_pred, n_classes=N_CLASSES) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true, dtype=np.intp), np.asarray(y_pred, dtype=np.intp)), 1)
    return cm


def evaluate(model: Sequential, X, y, batch_size=256):
    """Accuracy (trace / total) and confusion matrix; argmax ties go to the lowest class."""
    logits = predict_logits(model, X, batch_size)
    pred = logits.argmax(axis=1)
    cm = confusion_matrix(y, pred, model.n_classes)
    total = cm.sum()
    return (float(np.trace(cm)) / total if total else float("nan")), cm


def train(model: Sequential, X, y, cfg: TrainConfig, log=None):
    """Minibatch training; returns a list of per-epoch metric rows.

    Shuffling uses its own stream seeded from ``cfg.seed`` so a run is fully
    reproducible.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise TrainingError("empty training set")
    if y.min() < 0 or y.max() >= model.n_classes:
        raise TrainingError(f"labels must lie in [0, {model.n_classes})")
    rng = np.random.default_rng([cfg.seed, 1])
    n_val = int(math.floor(cfg.validation_fraction * len(X)))
    order = rng.permutation(len(X))
    val_idx, train_idx = order[:n_val], order[n_val:]
    X_val, y_val = X[val_idx], y[val_idx]
    X_tr, y_tr = X[train_idx], y[train_idx]

    opt = make_optimizer(cfg.optimizer, cfg.learning_rate)
    history = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(len(X_tr))
        total_loss = 0.0
        correct = 0
        for b, start in enumerate(range(0, len(perm), cfg.batch_size)):
            idx = perm[start:start + cfg.batch_size]
            try:
                logits = model.forward(X_tr[idx], training=True)
            except NumericError as exc:
                raise TrainingError(f"epoch {epoch}, batch {b}: {exc}") from exc
            loss, probs, dlogits = softmax_cross_entropy(logits, y_tr[idx])
            if not math.isfinite(loss):
                raise TrainingError(f"loss diverged at epoch {epoch}, batch {b}")
            model.backward(dlogits)
            opt.step(model)
            total_loss += loss * len(idx)
            correct += int(np.count_nonzero(probs.argmax(axis=1) == y_tr[idx]))
        history.append({"epoch": epoch + 1, "split": "train",
                        "loss": total_loss / len(X_tr), "accuracy": correct / len(X_tr)})
        if n_val:
            logits = predict_logits(model, X_val)
            vloss, _, _ = softmax_cross_entropy(logits, y_val)
            vacc = float(np.mean(logits.argmax(axis=1) == y_val))
            history.append({"epoch": epoch + 1, "split": "validation", "loss": vloss, "accuracy": vacc})
        if log is not None:
            log(history[-1])
    return history


def image_net(input_shape=(1, 64, 64), n_classes=N_CLASSES, seed=0) -> Sequential:
    """Heat-map classifier: three conv/BN/ReLU/pool blocks, then two dense layers."""
    layers = []
    for channels, k in ((8, 5), (16, 5), (32, 3)):
        layers += [Conv2D(channels, k), BatchNorm(), ReLU(), MaxPool(2)]
    layers += [Flatten(), Dense(128), ReLU(), Dense(n_classes)]
    return Sequential(layers, input_shape, seed)


def series_net(length=1000, n_classes=N_CLASSES, seed=0) -> Sequential:
    """Raw-series classifier built from width-5 1-D convolutions."""
    layers = [Conv2D(128, (1, 5)), BatchNorm(), ReLU(), MaxPool((1, 4)),
              Conv2D(128, (1, 5)), BatchNorm(), ReLU(), GlobalAvgPool(), Dense(n_classes)]
    return Sequential(layers, (1, 1, length), seed)


def tiny_net(input_shape=(1, 8, 8), n_classes=N_CLASSES, seed=0) -> Sequential:
    """Two-channel network used for gradient checks."""
    layers = [Conv2D(2, 3), BatchNorm(), ReLU(), MaxPool(2), Flatten(), Dense(n_classes)]
    return Sequential(layers, input_shape, seed)
