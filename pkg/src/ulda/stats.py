"""Multivariate test statistics and the forward-selection threshold.

Pillai's trace, Wilks' lambda, the partial-lambda/partial-F pair, the
Schur-complement trace increment for adding one column, and the
Beta-quantile inclusion threshold with the effective-class-count
adjustment.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh, solve_triangular, cholesky, LinAlgError

from .scatter import ScatterFactors
from .special import beta_quantile, f_sf

__all__ = [
    "SingularMatrixError",
    "IllDefinedPartialWilksError",
    "MaxTraceReachedError",
    "ThresholdSpec",
    "pillai_trace",
    "pillai_trace_from",
    "pillai_increment",
    "wilks_lambda",
    "wilks_lambda_from",
    "partial_wilks",
    "partial_f",
    "selection_threshold",
]

_EPS = np.finfo(float).eps

# Relative Schur-complement size below which a candidate column is treated
# as linearly dependent on the included set.
DEPENDENCY_TOL = 1e-10


class SingularMatrixError(ValueError):
    """Total scatter over the subset is rank-deficient."""


class IllDefinedPartialWilksError(ValueError):
    """Partial lambda is 0/0 because the running Wilks' lambda is zero."""


class MaxTraceReachedError(RuntimeError):
    """Effective class count is at most 1: the trace bound is exhausted."""


def _rank_tol(sigma_max: float, n: int, m: int) -> float:
    # standard rank-revealing convention
    return max(n, m) * _EPS * sigma_max


def _check_st_rank(St: np.ndarray, n_obs: int) -> np.ndarray:
    evals = eigh(St, eigvals_only=True)
    if evals[-1] <= 0.0 or evals[0] <= _rank_tol(evals[-1], n_obs, St.shape[0]):
        raise SingularMatrixError(
            "total scatter is singular over this column subset"
        )
    return evals


def pillai_trace_from(Sb: np.ndarray, St: np.ndarray, n_obs: int,
                      n_classes: int) -> float:
    """trace(St^-1 Sb) from the scatter matrices themselves."""
    _check_st_rank(St, n_obs)
    c, low = cho_factor(St, lower=True)
    value = float(np.trace(cho_solve((c, low), Sb)))
    upper = n_classes - 1.0
    if -1e-8 <= value < 0.0:
        value = 0.0
    elif upper < value <= upper + 1e-8:
        value = upper
    return value


def pillai_trace(factors: ScatterFactors) -> float:
    """trace(St^-1 Sb), clamped to [0, J-1] near the bounds.

    Raises SingularMatrixError when St is rank-deficient at the standard
    singular-value tolerance.
    """
    return pillai_trace_from(factors.Sb, factors.St, factors.n_obs, factors.n_classes)


def pillai_increment(Tx: np.ndarray, tx: np.ndarray, tz: float,
                     Sb_full: np.ndarray,
                     dep_tol: float = DEPENDENCY_TOL) -> tuple[float, bool]:
    """Trace gain from adding one column, via the Schur complement of Tx.

    Tx, tx, tz partition the total scatter over (included + candidate);
    Sb_full is the between-class scatter over the same columns.  Returns
    ``(increment, dependent)``; a candidate whose residual total variance
    tz - tx' Tx^-1 tx falls at or below ``dep_tol * tz`` is flagged
    dependent and contributes 0.
    """
    Tx = np.asarray(Tx, dtype=float)
    tx = np.asarray(tx, dtype=float).ravel()
    k = tx.size
    if Tx.shape != (k, k) or Sb_full.shape != (k + 1, k + 1):
        raise ValueError("block shapes are inconsistent")
    if k == 0:
        if tz <= 0.0 or tz <= dep_tol:
            return 0.0, True
        return max(float(Sb_full[0, 0]) / float(tz), 0.0), False
    c, low = cho_factor(Tx, lower=True)
    w = cho_solve((c, low), tx)
    schur = float(tz - tx @ w)
    if schur <= dep_tol * max(float(tz), 0.0) or schur <= 0.0:
        return 0.0, True
    a = np.append(w, -1.0)
    quad = float(a @ Sb_full @ a)
    inc = quad / schur
    if inc < 0.0:
        if inc < -1e-10:
            raise FloatingPointError(f"negative trace increment {inc}")
        inc = 0.0
    return inc, False


def _within_total_ratios(Sw: np.ndarray, St: np.ndarray, n_obs: int) -> np.ndarray:
    """Eigenvalues of the St-whitened within-class scatter (each in [0, 1])."""
    _check_st_rank(St, n_obs)
    try:
        L = cholesky(St, lower=True)
    except LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    Y = solve_triangular(L, Sw, lower=True)
    B = solve_triangular(L, Y.T, lower=True)
    return eigh(0.5 * (B + B.T), eigvals_only=True)


def wilks_lambda_from(Sw: np.ndarray, St: np.ndarray, n_obs: int) -> float:
    """det(Sw)/det(St) from the scatter matrices themselves."""
    ratios = _within_total_ratios(Sw, St, n_obs)
    tol = _rank_tol(1.0, n_obs, St.shape[0])
    if ratios[0] <= tol:
        return 0.0
    value = math.exp(float(np.sum(np.log(ratios))))
    return min(max(value, 0.0), 1.0)


def wilks_lambda(factors: ScatterFactors) -> float:
    """det(Sw)/det(St) as the product of within/total variance ratios.

    Returns exactly 0.0 as soon as any ratio sits at the rank tolerance, so
    perfect separation is detected before determinants underflow.
    """
    return wilks_lambda_from(factors.Sw, factors.St, factors.n_obs)


def partial_wilks(lambda_with: float, lambda_without: float) -> float:
    """Marginal Wilks ratio for one added column, clamped to [0, 1]."""
    if lambda_without <= 0.0:
        raise IllDefinedPartialWilksError(
            "running Wilks' lambda is 0; the partial ratio is 0/0"
        )
    return min(max(lambda_with / lambda_without, 0.0), 1.0)


def partial_f(partial_lambda: float, N: int, J: int, p: int) -> tuple[float, float]:
    """Partial F statistic and upper-tail p-value for one added column.

    ``p`` is the number of columns already included.  Under the null the
    statistic is F-distributed with (J-1, N-J-p) degrees of freedom.
    """
    dof2 = N - J - p
    if dof2 < 1:
        raise ValueError(f"nonpositive denominator degrees of freedom N-J-p = {dof2}")
    if partial_lambda < 0.0 or partial_lambda > 1.0:
        raise ValueError(f"partial lambda must be in [0, 1], got {partial_lambda}")
    if partial_lambda == 0.0:
        return math.inf, 0.0
    f_stat = (dof2 / (J - 1.0)) * (1.0 - partial_lambda) / partial_lambda
    return f_stat, f_sf(f_stat, J - 1.0, float(dof2))


@dataclass(frozen=True)
class ThresholdSpec:
    """Inclusion threshold for one forward-selection step."""

    alpha: float
    n_candidates: int
    n_obs: int
    j_effective: float
    threshold: float


def selection_threshold(alpha: float, l: int, J_eff: float, N: int) -> ThresholdSpec:
    """Beta-quantile threshold at level alpha over ``l`` candidates.

    The threshold is the (1-alpha)^(1/l) quantile of
    Beta((J_eff-1)/2, (N-J_eff)/2) where J_eff is the effective class
    count J minus the trace already captured.  Raises
    MaxTraceReachedError when J_eff <= 1 (nothing left to separate).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if l < 1:
        raise ValueError(f"candidate count must be >= 1, got {l}")
    if J_eff <= 1.0 + 1e-8:
        raise MaxTraceReachedError(
            f"effective class count {J_eff} <= 1: maximum trace reached"
        )
    if N <= J_eff:
        raise ValueError(f"need N > J_eff, got N={N}, J_eff={J_eff}")
    q = (1.0 - alpha) ** (1.0 / l)
    t = beta_quantile(q, 0.5 * (J_eff - 1.0), 0.5 * (N - J_eff))
    return ThresholdSpec(alpha=alpha, n_candidates=l, n_obs=N,
                         j_effective=J_eff, threshold=t)
