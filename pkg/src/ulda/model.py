"""ULDA: simultaneous-diagonalization fit and the Gaussian classifier.

The transformation W solves the trace criterion under W' St W = I.  Both
the plain path (factor the stacked (J+N) x M matrix directly) and the
QR-reduced path (replace the within-class factor by its triangular QR
factor first) are available; they produce the same model up to sign.

Directions that separate some group of classes perfectly (within/total
variance ratio at zero) get their within-class variance clamped to a
small constant so they dominate the discriminant scores.
"""

import json
from typing import Sequence

import numpy as np
from scipy import linalg as sla
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .scatter import Dataset, class_stats, scatter_factors

__all__ = [
    "complete_orthogonal_decomposition",
    "UldaClassifier",
    "fit_ulda",
    "zero_one_costs",
    "validate_cost_matrix",
]

_EPS = np.finfo(float).eps

MODEL_FORMAT_VERSION = 1


def complete_orthogonal_decomposition(K, tol: float | None = None):
    """Two-sided orthogonal factorization P' K Q = [[R, 0], [0, 0]].

    R is an invertible upper-triangular (here diagonal) rank x rank block;
    P and Q are square orthogonal.  ``tol`` is an absolute singular-value
    cutoff; by default the standard max(shape) * eps * sigma_max rule.

    Returns ``(P, R, Q, rank)``.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    U, s, Vt = sla.svd(K, full_matrices=True, check_finite=False)
    smax = s[0] if s.size else 0.0
    if tol is None:
        tol = max(K.shape) * _EPS * smax
    rank = int(np.sum(s > tol))
    R = np.diag(s[:rank])
    return U, R, Vt.T, rank


def zero_one_costs(n_classes: int) -> np.ndarray:
    """Default misclassification costs: 1 off the diagonal, 0 on it."""
    return 1.0 - np.eye(n_classes)


def validate_cost_matrix(costs, n_classes: int) -> np.ndarray:
    """Check a J x J cost matrix: nonnegative, correct never beats wrong."""
    C = np.asarray(costs, dtype=float)
    if C.shape != (n_classes, n_classes):
        raise ValueError(f"cost matrix must be {n_classes}x{n_classes}, got {C.shape}")
    if np.any(C < 0.0) or not np.all(np.isfinite(C)):
        raise ValueError("cost matrix entries must be finite and nonnegative")
    if np.any(np.diag(C) > C.min(axis=0) + 1e-12):
        raise ValueError("diagonal cost must be the minimum of each column")
    return C


class UldaClassifier(BaseEstimator, ClassifierMixin, TransformerMixin):
    """Uncorrelated LDA classifier with Gaussian posteriors.

    Parameters
    ----------
    priors : array-like of shape (n_classes,), optional
        Class priors; defaults to empirical class proportions.
    solver : {'qr', 'gsvd'}
        'qr' pre-reduces the within-class factor by a triangular QR factor
        before the orthogonal decomposition; 'gsvd' factors the full
        stacked matrix.  Results agree up to column sign.
    separation_tol : float
        A direction counts as perfectly separating when its within/total
        variance ratio is at or below this value.
    clamp_value : float
        Within-class variance substituted on perfectly separating
        directions.

    Attributes
    ----------
    classes_ : (J,) original labels in first-appearance order
    W_ : (M, t2) transformation matrix, sign-normalized per column
    alpha_sq_, beta_sq_ : (t2,) between/within variance per direction
    clamped_var_ : (t2,) within-class variance after clamping
    projected_means_ : (J, t2) class means in discriminant space
    priors_ : (J,) prior probabilities
    """

    def __init__(self, priors=None, solver: str = "qr",
                 separation_tol: float = 1e-8, clamp_value: float = 1e-5):
        self.priors = priors
        self.solver = solver
        self.separation_tol = separation_tol
        self.clamp_value = clamp_value

    def fit(self, X, y, column_names: Sequence[str] | None = None):
        if self.solver not in ("qr", "gsvd"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if column_names is None and hasattr(X, "columns"):
            column_names = list(X.columns)
        X, y = check_X_y(X, y, dtype=float)
        data = Dataset(X, y, column_names)
        N, M, J = data.n_obs, data.n_features, data.n_classes
        if N < J:
            raise ValueError(f"need at least as many rows as classes, got N={N}, J={J}")

        stats = class_stats(data, np.arange(M))
        factors = scatter_factors(data, stats, np.arange(M))
        if self.solver == "qr":
            Rw = sla.qr(factors.Hw, mode="r", check_finite=False)[0]
            K = np.vstack([factors.Hb, Rw[:min(N, M)]])
        else:
            K = np.vstack([factors.Hb, factors.Hw])

        U, s, Vt = sla.svd(K, full_matrices=False, check_finite=False)
        t1 = int(np.sum(s > max(K.shape) * _EPS * (s[0] if s.size else 0.0)))
        if t1 == 0:
            raise ValueError("all columns are constant: total scatter is zero")

        P1 = U[:J, :t1]
        U2, alpha, V2t = sla.svd(P1, full_matrices=False, check_finite=False)
        t2 = int(np.sum(alpha > max(J, t1) * _EPS * alpha[0])) if alpha[0] > 0 else 0

        # W = Q(:, 1:t1) R^-1 V, first t2 columns; R is diag(s) here
        W = Vt[:t1].T @ (V2t.T[:, :t2] / s[:t1, None])
        # deterministic sign: largest-magnitude entry of each column positive
        if t2 > 0:
            picks = np.argmax(np.abs(W), axis=0)
            signs = np.sign(W[picks, np.arange(t2)])
            signs[signs == 0] = 1.0
            W *= signs

        alpha_sq = np.clip(alpha[:t2] ** 2, 0.0, 1.0)
        beta_sq = 1.0 - alpha_sq
        clamped = np.where(beta_sq <= self.separation_tol, self.clamp_value, beta_sq)

        if self.priors is None:
            priors = stats.class_counts / N
        else:
            priors = np.asarray(self.priors, dtype=float)
            if priors.shape != (J,):
                raise ValueError(f"priors must have length {J}")
            if np.any(priors < 0) or not np.isclose(priors.sum(), 1.0, atol=1e-8):
                raise ValueError("priors must be nonnegative and sum to 1")
            priors = priors / priors.sum()

        self.classes_ = data.classes
        self.n_features_in_ = M
        self.feature_names_in_ = np.asarray(data.column_names, dtype=object)
        self.W_ = W
        self.alpha_sq_ = alpha_sq
        self.beta_sq_ = beta_sq
        self.clamped_var_ = clamped
        self.projected_means_ = stats.class_means @ W
        self.priors_ = priors
        self.fit_meta_ = {"n_obs": N, "n_classes": J, "rank_total": t1,
                          "n_directions": t2, "solver": self.solver}
        return self

    # ------------------------------------------------------------------

    def _check_X(self, X) -> np.ndarray:
        check_is_fitted(self, "W_")
        X = check_array(X, dtype=float, ensure_2d=True, ensure_min_samples=0)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was fitted with {self.n_features_in_}"
            )
        return X

    def transform(self, X) -> np.ndarray:
        """Project rows onto the discriminant directions (n x t2)."""
        return self._check_X(X) @ self.W_

    def decision_function(self, X) -> np.ndarray:
        """Gaussian discriminant scores per class (larger is better)."""
        Z = self.transform(X)
        meta = self.fit_meta_
        scale = max(meta["n_obs"] - meta["n_classes"], 1)  # pooled Sw/(N-J)
        dinv = scale / self.clamped_var_
        A = self.projected_means_ * dinv
        const = -0.5 * np.sum(self.projected_means_ * A, axis=1) + np.log(self.priors_)
        return Z @ A.T + const

    def predict_proba(self, X) -> np.ndarray:
        """Posterior class probabilities (softmax of discriminant scores)."""
        delta = self.decision_function(X)
        delta -= delta.max(axis=1, keepdims=True)
        np.exp(delta, out=delta)
        delta /= delta.sum(axis=1, keepdims=True)
        return delta

    def predict(self, X, costs=None) -> np.ndarray:
        """Predicted labels; with ``costs`` the expected-cost minimizer.

        Ties resolve toward the lower class index (first appearance).
        """
        posterior = self.predict_proba(X)
        if costs is None:
            idx = np.argmax(posterior, axis=1)
        else:
            C = validate_cost_matrix(costs, len(self.classes_))
            expected = posterior @ C.T
            idx = np.argmin(expected, axis=1)
        return self.classes_[idx]

    # ------------------------------------------------------------------

    def to_json(self) -> dict:
        """Versioned JSON document; reloading reproduces predictions exactly."""
        check_is_fitted(self, "W_")
        return {
            "version": MODEL_FORMAT_VERSION,
            "labels": self.classes_.tolist(),
            "priors": self.priors_.tolist(),
            "W": {"data": self.W_.ravel().tolist(), "shape": list(self.W_.shape)},
            "alpha_sq": self.alpha_sq_.tolist(),
            "clamped_var": self.clamped_var_.tolist(),
            "projected_means": {
                "data": self.projected_means_.ravel().tolist(),
                "shape": list(self.projected_means_.shape),
            },
            "column_names": list(self.feature_names_in_),
            "fit_meta": dict(self.fit_meta_),
            "params": {
                "solver": self.solver,
                "separation_tol": self.separation_tol,
                "clamp_value": self.clamp_value,
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "UldaClassifier":
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {doc.get('version')!r}")
        params = doc.get("params", {})
        model = cls(solver=params.get("solver", "qr"),
                    separation_tol=params.get("separation_tol", 1e-8),
                    clamp_value=params.get("clamp_value", 1e-5))
        model.classes_ = np.asarray(doc["labels"])
        model.priors_ = np.asarray(doc["priors"], dtype=float)
        W = doc["W"]
        model.W_ = np.asarray(W["data"], dtype=float).reshape(W["shape"])
        model.alpha_sq_ = np.asarray(doc["alpha_sq"], dtype=float)
        model.beta_sq_ = 1.0 - model.alpha_sq_
        model.clamped_var_ = np.asarray(doc["clamped_var"], dtype=float)
        pm = doc["projected_means"]
        model.projected_means_ = np.asarray(pm["data"], dtype=float).reshape(pm["shape"])
        model.feature_names_in_ = np.asarray(doc["column_names"], dtype=object)
        model.n_features_in_ = model.W_.shape[0]
        model.fit_meta_ = dict(doc["fit_meta"])
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "UldaClassifier":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def fit_ulda(data: Dataset, priors=None, solver: str = "qr") -> UldaClassifier:
    """Fit a :class:`UldaClassifier` on an in-memory dataset."""
    model = UldaClassifier(priors=priors, solver=solver)
    return model.fit(data.X, data.y, column_names=data.column_names)
