"""Scikit-learn compatible wrapper around the numpy ConvNet."""
from __future__ import annotations

import csv

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import ConfigError, ShapeError
from .network import (Sequential, TrainConfig, image_net, predict_logits, series_net, softmax,
                      tiny_net, train)

ARCHITECTURES = ("image", "series", "tiny")


class ConvNetClassifier(ClassifierMixin, BaseEstimator):
    """Small ConvNet over heat-maps (``architecture="image"``) or raw series.

    ``X`` is ``(n, H, W)`` for image models and ``(n, L)`` for series models.
    Labels are nonnegative integers. With ``n_classes=None`` the classes are
    the distinct training labels; otherwise they are ``0..n_classes-1``.
    """

    def __init__(self, architecture="image", n_classes=None, epochs=30, batch_size=64,
                 learning_rate=1e-3, optimizer="adam", random_state=0,
                 validation_fraction=0.0, verbose=False):
        self.architecture = architecture
        self.n_classes = n_classes
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.random_state = random_state
        self.validation_fraction = validation_fraction
        self.verbose = verbose

    def _as_tensor(self, X):
        if self.architecture == "series":
            X = check_array(X, ensure_min_features=5)
            return X[:, None, None, :]
        X = np.asarray(X, dtype=float)
        if X.ndim == 3:
            X = X[:, None]
        if X.ndim != 4:
            raise ShapeError(f"image models take (n, H, W) or (n, C, H, W) input, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("input contains non-finite values")
        return X

    def _build(self, sample_shape, n_out):
        seed = self.random_state
        if self.architecture == "image":
            return image_net(sample_shape, n_out, seed)
        if self.architecture == "series":
            return series_net(sample_shape[-1], n_out, seed)
        if self.architecture == "tiny":
            return tiny_net(sample_shape, n_out, seed)
        raise ConfigError(f"unknown architecture {self.architecture!r}; choose from {ARCHITECTURES}")

    def fit(self, X, y):
        X = self._as_tensor(X)
        y = np.asarray(y, dtype=np.int64).ravel()
        if len(X) != len(y):
            raise ShapeError(f"{len(X)} samples but {len(y)} labels")
        if self.n_classes is None:
            self.classes_ = np.unique(y)
        else:
            if len(y) and (y.min() < 0 or y.max() >= self.n_classes):
                raise ValueError(f"labels must lie in [0, {self.n_classes})")
            self.classes_ = np.arange(self.n_classes)
        if len(self.classes_) == 0:
            raise ValueError("cannot fit on an empty training set")
        self.model_ = self._build(X.shape[1:], len(self.classes_))
        self.n_features_in_ = int(np.prod(X.shape[1:]))
        cfg = TrainConfig(self.epochs, self.batch_size, self.learning_rate, self.optimizer,
                          self.random_state, self.validation_fraction)
        log = print if self.verbose else None
        idx = np.searchsorted(self.classes_, y)
        self.history_ = train(self.model_, X, idx, cfg, log) if self.epochs else []
        return self

    @classmethod
    def from_model(cls, model: Sequential, classes=None, **params) -> "ConvNetClassifier":
        """Wrap an already trained network (e.g. a loaded checkpoint)."""
        if "architecture" not in params:
            params["architecture"] = "series" if model.input_shape[1] == 1 else "image"
        classes = np.arange(model.n_classes) if classes is None else np.asarray(classes, dtype=np.int64)
        if len(classes) != model.n_classes:
            raise ShapeError(f"{len(classes)} class labels for a {model.n_classes}-output network")
        clf = cls(**params)
        clf.model_ = model
        clf.classes_ = classes
        clf.n_features_in_ = int(np.prod(model.input_shape))
        clf.history_ = []
        return clf

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        return predict_logits(self.model_, self._as_tensor(X))

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        return self.classes_[self.decision_function(X).argmax(axis=1)]

    def evaluate(self, X, y):
        """``(accuracy, confusion matrix)``.

        Matrix rows are true labels, columns predictions, both ordered over
        the union of ``classes_`` and the labels in ``y``.
        """
        y = np.asarray(y, dtype=np.int64).ravel()
        pred = self.predict(X)
        labels = np.union1d(self.classes_, y)
        cm = np.zeros((len(labels), len(labels)), dtype=np.int64)
        np.add.at(cm, (np.searchsorted(labels, y), np.searchsorted(labels, pred)), 1)
        acc = float(np.trace(cm) / len(y)) if len(y) else float("nan")
        return acc, cm

    def write_history(self, path):
        check_is_fitted(self, "history_")
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["epoch", "split", "loss", "accuracy"])
            writer.writeheader()
            writer.writerows(self.history_)
