"""Central finite-difference checks of the analytic gradients."""
from __future__ import annotations

import numpy as np

from .layers import Layer
from .network import Sequential, softmax_cross_entropy


def relative_error(analytic, numeric, floor=1e-6) -> float:
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def numeric_gradient(f, arr: np.ndarray, h=1e-4) -> np.ndarray:
    """Central differences of scalar ``f()`` w.r.t. every entry of ``arr`` (mutated in place)."""
    grad = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = arr[i]
        arr[i] = old + h
        fp = f()
        arr[i] = old - h
        fm = f()
        arr[i] = old
        grad[i] = (fp - fm) / (2 * h)
    return grad


def check_layer(layer: Layer, x: np.ndarray, rng, training=True, h=1e-4) -> dict[str, float]:
    """Relative errors for the input and every parameter of a built layer.

    The scalar objective is ``sum(out * R)`` for a fixed random ``R``.
    """
    out = layer.forward(x, training)
    weights = rng.standard_normal(out.shape)

    def f():
        return float(np.sum(layer.forward(x, training) * weights))

    layer.forward(x, training)
    dx = layer.backward(weights)
    analytic = {name: layer.grads[name].copy() for name in layer.params}
    errors = {"input": relative_error(dx, numeric_gradient(f, x, h))}
    for name, g in analytic.items():
        errors[name] = relative_error(g, numeric_gradient(f, layer.params[name], h))
    return errors


def check_model(model: Sequential, x, y, h=1e-4) -> dict[str, float]:
    """Relative errors of the mean cross-entropy gradient for every parameter array."""

    def f():
        return softmax_cross_entropy(model.forward(x, training=True), y)[0]

    _, _, dlogits = softmax_cross_entropy(model.forward(x, training=True), y)
    dx = model.backward(dlogits)
    analytic = [(i, name, g.copy()) for i, name, g in model.gradients()]
    errors = {"input": relative_error(dx, numeric_gradient(f, x, h))}
    params = {(i, name): p for i, name, p in model.parameters()}
    for i, name, g in analytic:
        key = f"{i}:{type(model.layers[i]).__name__}.{name}"
        errors[key] = relative_error(g, numeric_gradient(f, params[(i, name)], h))
    return errors
