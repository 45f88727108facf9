"""Layers with hand-written forward and backward passes.

All tensors are float64 in NCHW layout. One-dimensional inputs are carried as
``(N, C, 1, L)`` so a width-``k`` 1-D convolution is a ``(1, k)`` kernel.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import ShapeError

BN_EPSILON = 1e-5
BN_MOMENTUM = 0.9


def _pair(v):
    if isinstance(v, (tuple, list)):
        return int(v[0]), int(v[1])
    return int(v), int(v)


class Layer:
    """Base class; parameters live in ``params`` with matching ``grads``."""

    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.input_shape = None
        self.output_shape = None

    def build(self, input_shape, rng):
        self.input_shape = tuple(input_shape)
        self.output_shape = self._output_shape(self.input_shape)
        self._init(rng)
        return self.output_shape

    def _output_shape(self, input_shape):
        return input_shape

    def _init(self, rng):
        pass

    def _zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def config(self) -> dict:
        return {}

    def descriptor(self) -> dict:
        return {"type": self.kind, **self.config()}

    def forward(self, x, training=False):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.config().items())
        return f"{type(self).__name__}({args})"


def conv2d_forward(x, kernel, bias=None, stride=1, pad=0):
    """Cross-correlation of ``x`` (N, C, H, W) with ``kernel`` (O, C, kh, kw).

    A 3-D ``x`` (C, H, W) is treated as a batch of one.
    """
    single = x.ndim == 3
    if single:
        x = x[None]
    out, _ = _conv_forward(np.asarray(x, dtype=float), np.asarray(kernel, dtype=float),
                           bias, _pair(stride), _pair(pad))
    return out[0] if single else out


def _conv_forward(x, w, b, stride, pad):
    if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]:
        raise ShapeError(f"convolution input {x.shape} does not fit kernel {w.shape}")
    ph, pw = pad
    sh, sw = stride
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw))) if ph or pw else x
    kh, kw = w.shape[2:]
    if xp.shape[2] < kh or xp.shape[3] < kw:
        raise ShapeError(f"convolution input {x.shape} smaller than kernel {w.shape}")
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    # win: (N, C, Ho, Wo, kh, kw)
    out = np.tensordot(win, w, axes=([1, 4, 5], [1, 2, 3]))  # (N, Ho, Wo, O)
    if b is not None:
        out = out + b
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2)), (xp.shape, win)


class Conv2D(Layer):
    kind = "conv2d"

    def __init__(self, out_channels, kernel_size, stride=1, padding="same"):
        super().__init__()
        self.out_channels = int(out_channels)
        self.kernel_size = _pair(kernel_size)
        self.stride = _pair(stride)
        if padding == "same":
            padding = (self.kernel_size[0] // 2, self.kernel_size[1] // 2)
        self.padding = _pair(padding)

    def config(self):
        return {"out_channels": self.out_channels, "kernel_size": list(self.kernel_size),
                "stride": list(self.stride), "padding": list(self.padding)}

    def _output_shape(self, s):
        if len(s) != 3:
            raise ShapeError(f"Conv2D expects (C, H, W) input, got {s}")
        c, h, w = s
        kh, kw = self.kernel_size
        ho = (h + 2 * self.padding[0] - kh) // self.stride[0] + 1
        wo = (w + 2 * self.padding[1] - kw) // self.stride[1] + 1
        if ho < 1 or wo < 1:
            raise ShapeError(f"Conv2D kernel {self.kernel_size} too large for input {s}")
        return (self.out_channels, ho, wo)

    def _init(self, rng):
        c = self.input_shape[0]
        kh, kw = self.kernel_size
        limit = math.sqrt(6.0 / (c * kh * kw))
        self.params = {
            "W": rng.uniform(-limit, limit, (self.out_channels, c, kh, kw)),
            "b": np.zeros(self.out_channels),
        }
        self._zero_grads()

    def forward(self, x, training=False):
        out, cache = _conv_forward(x, self.params["W"], self.params["b"], self.stride, self.padding)
        self._cache = cache
        return out

    def backward(self, dout):
        xp_shape, win = self._cache
        w = self.params["W"]
        sh, sw = self.stride
        kh, kw = self.kernel_size
        n, o, ho, wo = dout.shape
        self.grads["W"] = np.tensordot(dout, win, axes=([0, 2, 3], [0, 2, 3]))
        self.grads["b"] = dout.sum(axis=(0, 2, 3))
        # (N, Ho, Wo, C, kh, kw)
        dcols = np.tensordot(dout.transpose(0, 2, 3, 1), w, axes=([3], [0]))
        dxp = np.zeros(xp_shape)
        for i in range(kh):
            for j in range(kw):
                dxp[:, :, i:i + sh * ho:sh, j:j + sw * wo:sw] += dcols[..., i, j].transpose(0, 3, 1, 2)
        ph, pw = self.padding
        return dxp[:, :, ph:xp_shape[2] - ph, pw:xp_shape[3] - pw]


class BatchNorm(Layer):
    """Per-channel normalisation; batch statistics in training, running ones otherwise."""

    kind = "batchnorm"

    def __init__(self, epsilon=BN_EPSILON, momentum=BN_MOMENTUM):
        super().__init__()
        self.epsilon = float(epsilon)
        self.momentum = float(momentum)

    def config(self):
        return {"epsilon": self.epsilon, "momentum": self.momentum}

    def _init(self, rng):
        c = self.input_shape[0]
        self.params = {"gamma": np.ones(c), "beta": np.zeros(c)}
        self.buffers = {"running_mean": np.zeros(c), "running_var": np.ones(c)}
        self._zero_grads()

    def _axes(self, x):
        return (0,) if x.ndim == 2 else (0, 2, 3)

    def _bcast(self, v, x):
        return v if x.ndim == 2 else v[None, :, None, None]

    def forward(self, x, training=False):
        axes = self._axes(x)
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.buffers["running_mean"] = m * self.buffers["running_mean"] + (1 - m) * mean
            self.buffers["running_var"] = m * self.buffers["running_var"] + (1 - m) * var
        else:
            mean = self.buffers["running_mean"]
            var = self.buffers["running_var"]
        inv_std = 1.0 / np.sqrt(var + self.epsilon)
        xhat = (x - self._bcast(mean, x)) * self._bcast(inv_std, x)
        self._cache = (xhat, inv_std, axes, training)
        return self._bcast(self.params["gamma"], x) * xhat + self._bcast(self.params["beta"], x)

    def backward(self, dout):
        xhat, inv_std, axes, training = self._cache
        self.grads["gamma"] = np.sum(dout * xhat, axis=axes)
        self.grads["beta"] = np.sum(dout, axis=axes)
        dxhat = dout * self._bcast(self.params["gamma"], dout)
        if not training:
            return dxhat * self._bcast(inv_std, dout)
        m = dout.size // dout.shape[1]
        s1 = self._bcast(dxhat.sum(axis=axes), dout)
        s2 = self._bcast(np.sum(dxhat * xhat, axis=axes), dout)
        return self._bcast(inv_std, dout) / m * (m * dxhat - s1 - xhat * s2)


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, training=False):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0.0)


class MaxPool(Layer):
    """Non-overlapping max pooling; trailing rows/columns that do not fill a window are dropped."""

    kind = "maxpool"

    def __init__(self, pool_size=2):
        super().__init__()
        self.pool_size = _pair(pool_size)

    def config(self):
        return {"pool_size": list(self.pool_size)}

    def _output_shape(self, s):
        c, h, w = s
        ph, pw = self.pool_size
        if h < ph or w < pw:
            raise ShapeError(f"MaxPool {self.pool_size} too large for input {s}")
        return (c, h // ph, w // pw)

    def forward(self, x, training=False):
        n, c, h, w = x.shape
        ph, pw = self.pool_size
        ho, wo = h // ph, w // pw
        blocks = x[:, :, :ho * ph, :wo * pw].reshape(n, c, ho, ph, wo, pw)
        blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho, wo, ph * pw)
        idx = blocks.argmax(axis=-1)[..., None]
        self._cache = (x.shape, idx)
        return np.take_along_axis(blocks, idx, axis=-1)[..., 0]

    def backward(self, dout):
        (n, c, h, w), idx = self._cache
        ph, pw = self.pool_size
        ho, wo = dout.shape[2:]
        blocks = np.zeros((n, c, ho, wo, ph * pw))
        np.put_along_axis(blocks, idx, dout[..., None], axis=-1)
        blocks = blocks.reshape(n, c, ho, wo, ph, pw).transpose(0, 1, 2, 4, 3, 5)
        dx = np.zeros((n, c, h, w))
        dx[:, :, :ho * ph, :wo * pw] = blocks.reshape(n, c, ho * ph, wo * pw)
        return dx


class GlobalAvgPool(Layer):
    kind = "gap"

    def _output_shape(self, s):
        return (s[0],)

    def forward(self, x, training=False):
        self._shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, dout):
        n, c, h, w = self._shape
        return np.broadcast_to(dout[:, :, None, None] / (h * w), self._shape).copy()


class Flatten(Layer):
    kind = "flatten"

    def _output_shape(self, s):
        return (int(np.prod(s)),)

    def forward(self, x, training=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class Dense(Layer):
    kind = "dense"

    def __init__(self, units):
        super().__init__()
        self.units = int(units)

    def config(self):
        return {"units": self.units}

    def _output_shape(self, s):
        if len(s) != 1:
            raise ShapeError(f"Dense expects a flat input, got {s}")
        return (self.units,)

    def _init(self, rng):
        fan_in = self.input_shape[0]
        limit = math.sqrt(6.0 / fan_in)
        self.params = {"W": rng.uniform(-limit, limit, (fan_in, self.units)),
                       "b": np.zeros(self.units)}
        self._zero_grads()

    def forward(self, x, training=False):
        if x.ndim != 2 or x.shape[1] != self.params["W"].shape[0]:
            raise ShapeError(f"Dense input {x.shape} does not fit weights {self.params['W'].shape}")
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        self.grads["W"] = self._x.T @ dout
        self.grads["b"] = dout.sum(axis=0)
        return dout @ self.params["W"].T


LAYER_TYPES = {cls.kind: cls for cls in (Conv2D, BatchNorm, ReLU, MaxPool, GlobalAvgPool, Flatten, Dense)}


def layer_from_descriptor(desc: dict) -> Layer:
    desc = dict(desc)
    cls = LAYER_TYPES[desc.pop("type")]
    return cls(**desc)
