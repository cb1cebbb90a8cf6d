"""Class statistics and between/within/total scatter for column subsets.

Scatter matrices are always rebuilt from the raw columns of the selected
subset (two-pass centering); nothing here is updated incrementally.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["Dataset", "ClassStats", "ScatterFactors", "class_stats", "scatter_factors"]


class Dataset:
    """Numeric design matrix with class labels and column names.

    Labels keep their original values for reporting; internally they are
    mapped to dense indices 0..J-1 in order of first appearance.
    """

    def __init__(self, X, y, column_names: Sequence[str] | None = None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        n, m = X.shape
        if n < 1 or m < 1:
            raise ValueError(f"X must be non-empty, got shape {X.shape}")
        y = np.asarray(y)
        if y.ndim != 1 or y.shape[0] != n:
            raise ValueError(f"y must have one label per row ({n}), got shape {y.shape}")
        if y.dtype.kind == "f" and np.isnan(y).any():
            raise ValueError("y contains missing labels")
        if y.dtype == object and any(v is None for v in y):
            raise ValueError("y contains missing labels")
        classes, first_pos, inverse = np.unique(y, return_index=True, return_inverse=True)
        order = np.argsort(first_pos)            # first-appearance order
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        self.classes = classes[order]
        self.y_index = rank[inverse]
        if self.classes.size < 2:
            raise ValueError("need at least 2 classes")
        if column_names is None:
            column_names = [f"x{i}" for i in range(m)]
        if len(column_names) != m:
            raise ValueError(f"expected {m} column names, got {len(column_names)}")
        self.X = X
        self.y = y
        self.column_names = list(column_names)

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return self.classes.size

    def _check_cols(self, cols) -> np.ndarray:
        cols = np.asarray(cols, dtype=int)
        if cols.ndim != 1 or cols.size == 0:
            raise ValueError("column subset must be a non-empty index list")
        if cols.min() < 0 or cols.max() >= self.n_features:
            raise IndexError(f"column index out of range 0..{self.n_features - 1}")
        return cols


@dataclass(frozen=True)
class ClassStats:
    """Per-class counts, per-class means and the grand mean over a subset."""

    class_counts: np.ndarray        # (J,)
    class_means: np.ndarray         # (J, m)
    grand_mean: np.ndarray          # (m,)
    cols: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class ScatterFactors:
    """Scatter factors and matrices over a column subset.

    Sb = Hb' Hb, Sw = Hw' Hw, St = Sb + Sw; Hw rows are grouped by class.
    """

    Hb: np.ndarray                  # (J, m)
    Hw: np.ndarray                  # (N, m)
    Sb: np.ndarray                  # (m, m)
    Sw: np.ndarray                  # (m, m)
    St: np.ndarray                  # (m, m)

    @property
    def n_obs(self) -> int:
        return self.Hw.shape[0]

    @property
    def n_classes(self) -> int:
        return self.Hb.shape[0]


def class_stats(data: Dataset, cols) -> ClassStats:
    """Counts, class means and grand mean over the selected columns."""
    cols = data._check_cols(cols)
    Xs = data.X[:, cols]
    J = data.n_classes
    counts = np.bincount(data.y_index, minlength=J)
    means = np.empty((J, cols.size))
    for j in range(J):
        means[j] = Xs[data.y_index == j].mean(axis=0)
    grand = counts @ means / counts.sum()
    return ClassStats(class_counts=counts, class_means=means, grand_mean=grand, cols=cols)


def scatter_factors(data: Dataset, stats: ClassStats, cols) -> ScatterFactors:
    """Build Hb, Hw and Sb, Sw, St over the selected columns."""
    cols = data._check_cols(cols)
    if stats.class_means.shape != (data.n_classes, cols.size):
        raise ValueError("stats shape does not match the requested column subset")
    if stats.cols is not None and not np.array_equal(stats.cols, cols):
        raise ValueError("stats were computed for a different column subset")
    Xs = data.X[:, cols]
    Hb = np.sqrt(stats.class_counts)[:, None] * (stats.class_means - stats.grand_mean)
    # rows grouped by class (first-appearance order), original order inside a class
    order = np.argsort(data.y_index, kind="stable")
    Hw = Xs[order] - stats.class_means[data.y_index[order]]
    Sb = Hb.T @ Hb
    Sw = Hw.T @ Hw
    return ScatterFactors(Hb=Hb, Hw=Hw, Sb=Sb, Sw=Sw, St=Sb + Sw)
