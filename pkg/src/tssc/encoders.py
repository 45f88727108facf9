"""Scikit-learn transformers turning batches of series into model inputs."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .grids import DCR_BOUNDS, TSSC_BOUNDS, dcr_heatmap, tssc_heatmap
from .maps import normalize


class SeriesNormalizer(TransformerMixin, BaseEstimator):
    """Min-max scale every row (one series) to [-1, 1] independently."""

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=1)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return normalize(check_array(X))


class _HeatMapEncoder(TransformerMixin, BaseEstimator):
    _min_length = 2

    def __init__(self, grid_size=64, norm="max"):
        self.grid_size = grid_size
        self.norm = norm

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=self._min_length)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_min_features=self._min_length)
        out = np.empty((X.shape[0], self.grid_size, self.grid_size))
        for k, row in enumerate(X):
            out[k] = self._encode(row).cells
        return out


class TSSCEncoder(_HeatMapEncoder):
    """Triad-plane heat-map of each (already normalised) series.

    Output shape is ``(n_series, grid_size, grid_size)``.
    """

    _min_length = 3

    def __init__(self, grid_size=64, norm="max", bounds=TSSC_BOUNDS):
        super().__init__(grid_size, norm)
        self.bounds = bounds

    def _encode(self, row):
        return tssc_heatmap(row, self.grid_size, self.norm, self.bounds)


class DCREncoder(_HeatMapEncoder):
    """Delay-1 embedding heat-map of each (already normalised) series."""

    def __init__(self, grid_size=64, norm="max", bounds=DCR_BOUNDS):
        super().__init__(grid_size, norm)
        self.bounds = bounds

    def _encode(self, row):
        return dcr_heatmap(row, self.grid_size, self.norm, self.bounds)
