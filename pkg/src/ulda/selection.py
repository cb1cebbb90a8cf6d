"""Greedy forward variable selection for discriminant analysis.

Three criteria are available: the Pillai-trace increment against a
Beta-quantile threshold that adjusts for the number of remaining
candidates and the trace already captured (controls the family-wise
type-I error), and the legacy partial-F criterion on Wilks' lambda with
or without a Bonferroni correction (kept for comparison; stops
prematurely once the running lambda hits zero).
"""

import json
import math
import warnings
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .scatter import Dataset, class_stats, scatter_factors
from .stats import (
    DEPENDENCY_TOL,
    MaxTraceReachedError,
    SingularMatrixError,
    pillai_trace_from,
    selection_threshold,
    wilks_lambda_from,
)
from .special import f_sf

__all__ = [
    "Criterion",
    "StopReason",
    "SelectionConfig",
    "StepRecord",
    "SelectionResult",
    "VariableRanking",
    "forward_select",
    "rank_variables",
    "ForwardSelector",
]

# Schur solves are re-derived from scratch above this condition estimate.
_ILL_CONDITIONED = 1e12


class Criterion(str, Enum):
    PILLAI = "pillai"
    WILKS = "wilks"
    WILKS_BONFERRONI = "wilks-bonferroni"


class StopReason(str, Enum):
    THRESHOLD_NOT_MET = "threshold-not-met"
    MAX_TRACE_REACHED = "max-trace-reached"
    ALL_SELECTED = "all-selected"
    WILKS_ZERO_STOP = "wilks-zero-stop"
    NONE_SIGNIFICANT_RETURN_ALL = "none-significant-return-all"
    MAX_STEPS = "max-steps"


@dataclass
class SelectionConfig:
    """Criterion, level and optional step cap for forward selection."""

    criterion: Criterion = Criterion.PILLAI
    alpha: float = 0.05
    max_steps: int | None = None

    def __post_init__(self):
        self.criterion = Criterion(self.criterion)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass
class StepRecord:
    """One accepted forward-selection step."""

    step: int
    column: int
    name: str
    candidate_count: int
    best_statistic: float
    threshold: float
    pillai_after: float
    p_value: float | None = None
    lambda_after: float | None = None


@dataclass
class SelectionResult:
    """Ordered selected columns with the per-step trajectory."""

    selected: list[int]
    selected_names: list[str]
    trajectory: list[StepRecord]
    stop_reason: StopReason
    criterion: Criterion
    alpha: float
    n_features: int

    @property
    def significant_columns(self) -> list[int]:
        """Columns that actually passed the criterion.

        Empty when nothing was significant and ``selected`` was filled
        with all columns as the fitting fallback.
        """
        if self.stop_reason is StopReason.NONE_SIGNIFICANT_RETURN_ALL:
            return []
        return list(self.selected)

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion.value,
            "alpha": self.alpha,
            "n_features": self.n_features,
            "selected": list(self.selected),
            "selected_names": list(self.selected_names),
            "stop_reason": self.stop_reason.value,
            "trajectory": [asdict(r) for r in self.trajectory],
        }

    def format_table(self) -> str:
        """Human-readable step table."""
        lines = [
            f"forward selection ({self.criterion.value}, alpha={self.alpha})",
            f"{'step':>4}  {'column':<24} {'candidates':>10} "
            f"{'statistic':>12} {'threshold':>12} {'pillai':>10}",
        ]
        for r in self.trajectory:
            lines.append(
                f"{r.step:>4}  {r.name:<24} {r.candidate_count:>10} "
                f"{r.best_statistic:>12.6g} {r.threshold:>12.6g} {r.pillai_after:>10.6g}"
            )
        if not self.trajectory:
            lines.append("  (no variable passed the criterion)")
        lines.append(f"stop reason: {self.stop_reason.value}; "
                     f"selected {len(self.selected)} of {self.n_features} columns")
        return "\n".join(lines)


@dataclass
class VariableRanking:
    """Full greedy ordering, ignoring the stop threshold."""

    order: list[int]
    names: list[str]
    statistics: list[float]
    criterion: Criterion


# ---------------------------------------------------------------------------
# shared machinery


class _ScatterCache:
    """Single source of truth: full-matrix scatter, indexed per subset."""

    def __init__(self, data: Dataset):
        self.data = data
        cols = np.arange(data.n_features)
        stats = class_stats(data, cols)
        factors = scatter_factors(data, stats, cols)
        self.Sb = factors.Sb
        self.Sw = factors.Sw
        self.St = factors.St
        self.N = data.n_obs
        self.J = data.n_classes
        self.constant = np.ptp(data.X, axis=0) == 0.0
        if self.constant.all():
            raise ValueError("all columns are constant")
        if self.constant.any():
            names = [data.column_names[i] for i in np.flatnonzero(self.constant)]
            warnings.warn(
                f"constant columns will never be selected: {names}",
                UserWarning, stacklevel=3,
            )

    def trace_over(self, cols) -> float:
        ix = np.asarray(cols, dtype=int)
        sub = np.ix_(ix, ix)
        return pillai_trace_from(self.Sb[sub], self.St[sub], self.N, self.J)

    def lambda_over(self, cols) -> float:
        ix = np.asarray(cols, dtype=int)
        sub = np.ix_(ix, ix)
        return wilks_lambda_from(self.Sw[sub], self.St[sub], self.N)


def _chol_or_none(A):
    try:
        c, low = cho_factor(A, lower=True)
    except LinAlgError:
        return None
    d = np.diag(c)
    if d.min() <= 0.0 or (d.max() / d.min()) ** 2 > _ILL_CONDITIONED:
        return None
    return c, low


def _pillai_increments(cache: _ScatterCache, sel: list[int],
                       pool: np.ndarray) -> np.ndarray:
    """Trace gain for each candidate; dependent/degenerate ones get 0."""
    Sb, St = cache.Sb, cache.St
    tz = St[pool, pool]
    bz = Sb[pool, pool]
    if not sel:
        ok = (tz > 0.0) & ~cache.constant[pool]
        inc = np.zeros(pool.size)
        np.divide(bz, tz, out=inc, where=ok)
        return np.clip(inc, 0.0, None)
    ix = np.asarray(sel)
    Tx = St[np.ix_(ix, ix)]
    cho = _chol_or_none(Tx)
    if cho is None:
        return _pillai_increments_recompute(cache, sel, pool)
    TX = St[np.ix_(ix, pool)]                       # (k, l)
    W = cho_solve(cho, TX)
    schur = tz - np.sum(TX * W, axis=0)
    Bx = Sb[np.ix_(ix, ix)]
    BX = Sb[np.ix_(ix, pool)]
    quad = np.sum(W * (Bx @ W), axis=0) - 2.0 * np.sum(W * BX, axis=0) + bz
    dependent = (schur <= np.maximum(tz, 0.0) * DEPENDENCY_TOL) | cache.constant[pool]
    inc = np.zeros(pool.size)
    np.divide(quad, schur, out=inc, where=~dependent)
    inc = np.clip(inc, 0.0, None)
    if not np.all(np.isfinite(inc)):
        return _pillai_increments_recompute(cache, sel, pool)
    return inc


def _pillai_increments_recompute(cache: _ScatterCache, sel: list[int],
                                 pool: np.ndarray) -> np.ndarray:
    """Slow path: full trace recomputation per candidate."""
    base = cache.trace_over(sel) if sel else 0.0
    inc = np.zeros(pool.size)
    for i, c in enumerate(pool):
        try:
            inc[i] = max(cache.trace_over(list(sel) + [int(c)]) - base, 0.0)
        except SingularMatrixError:
            inc[i] = 0.0
    return inc


def _wilks_partials(cache: _ScatterCache, sel: list[int],
                    pool: np.ndarray) -> np.ndarray:
    """Partial lambda per candidate via determinant Schur complements.

    Linearly dependent candidates get 1.0 (no discriminative effect, the
    conventional fix for a 0/0 ratio); candidates whose residual
    within-class variance vanishes get 0.0.
    """
    Sw, St = cache.Sw, cache.St
    tz = St[pool, pool]
    wz = Sw[pool, pool]
    if not sel:
        scT, scW = tz, wz
    else:
        ix = np.asarray(sel)
        choT = _chol_or_none(St[np.ix_(ix, ix)])
        choW = _chol_or_none(Sw[np.ix_(ix, ix)])
        if choT is None or choW is None:
            return _wilks_partials_recompute(cache, sel, pool)
        TX = St[np.ix_(ix, pool)]
        WX = Sw[np.ix_(ix, pool)]
        scT = tz - np.sum(TX * cho_solve(choT, TX), axis=0)
        scW = wz - np.sum(WX * cho_solve(choW, WX), axis=0)
    dependent = (scT <= np.maximum(tz, 0.0) * DEPENDENCY_TOL) | cache.constant[pool]
    separated = scW <= np.maximum(tz, 0.0) * 1e-12
    partial = np.ones(pool.size)
    valid = ~dependent
    np.divide(scW, scT, out=partial, where=valid)
    partial[valid & separated] = 0.0
    partial[dependent] = 1.0
    return np.clip(partial, 0.0, 1.0)


def _wilks_partials_recompute(cache: _ScatterCache, sel: list[int],
                              pool: np.ndarray) -> np.ndarray:
    base = cache.lambda_over(sel) if sel else 1.0
    partial = np.ones(pool.size)
    for i, c in enumerate(pool):
        try:
            partial[i] = cache.lambda_over(list(sel) + [int(c)]) / base
        except SingularMatrixError:
            partial[i] = 1.0
    return np.clip(partial, 0.0, 1.0)


# ---------------------------------------------------------------------------
# forward selection


def forward_select(data: Dataset, config: SelectionConfig | None = None) -> SelectionResult:
    """Run forward selection on a dataset under the configured criterion.

    With the Pillai criterion a candidate enters while its trace increment
    exceeds the Beta-quantile threshold; with the Wilks variants the
    largest partial F enters while its (optionally Bonferroni-adjusted)
    p-value stays below alpha.  When no variable at all is significant the
    result carries every column with stop reason
    ``NONE_SIGNIFICANT_RETURN_ALL`` so a model can still be fitted.
    """
    config = config or SelectionConfig()
    return _run_selection(_ScatterCache(data), config)


def _run_selection(cache: _ScatterCache, config: SelectionConfig) -> SelectionResult:
    data = cache.data
    M, N, J = data.n_features, cache.N, cache.J
    if config.criterion is Criterion.PILLAI:
        step_cap = M
    else:
        step_cap = min(M, N - J - 1)
    if config.max_steps is not None:
        step_cap = min(step_cap, config.max_steps)

    sel: list[int] = []
    pool = np.arange(M)
    trajectory: list[StepRecord] = []
    stop = StopReason.ALL_SELECTED
    prev_trace = 0.0
    run_lambda = 1.0

    while pool.size:
        if len(sel) >= step_cap:
            stop = StopReason.MAX_STEPS
            break
        l = int(pool.size)
        if config.criterion is Criterion.PILLAI:
            inc = _pillai_increments(cache, sel, pool)
            best = int(np.argmax(inc))
            try:
                spec = selection_threshold(config.alpha, l, J - prev_trace, N)
            except MaxTraceReachedError:
                stop = StopReason.MAX_TRACE_REACHED
                break
            if inc[best] <= spec.threshold:
                stop = StopReason.THRESHOLD_NOT_MET
                break
            chosen = int(pool[best])
            sel.append(chosen)
            prev_trace = cache.trace_over(sel)
            trajectory.append(StepRecord(
                step=len(sel), column=chosen, name=data.column_names[chosen],
                candidate_count=l, best_statistic=float(inc[best]),
                threshold=spec.threshold, pillai_after=prev_trace,
            ))
        else:
            p = len(sel)
            partial = _wilks_partials(cache, sel, pool)
            dof2 = N - J - p
            with np.errstate(divide="ignore"):
                f_stats = (dof2 / (J - 1.0)) * (1.0 - partial) / partial
            best = int(np.argmax(f_stats))
            f_best = float(f_stats[best])
            p_val = 0.0 if math.isinf(f_best) else f_sf(f_best, J - 1.0, float(dof2))
            if config.criterion is Criterion.WILKS_BONFERRONI:
                p_val = min(p_val * l, 1.0)
            if p_val >= config.alpha:
                stop = StopReason.THRESHOLD_NOT_MET
                break
            chosen = int(pool[best])
            sel.append(chosen)
            run_lambda = cache.lambda_over(sel)
            try:
                trace_after = cache.trace_over(sel)
            except SingularMatrixError:
                trace_after = float("nan")
            trajectory.append(StepRecord(
                step=len(sel), column=chosen, name=data.column_names[chosen],
                candidate_count=l, best_statistic=f_best,
                threshold=config.alpha, pillai_after=trace_after,
                p_value=p_val, lambda_after=run_lambda,
            ))
            if run_lambda == 0.0:
                stop = StopReason.WILKS_ZERO_STOP
                break
        pool = pool[pool != chosen]

    if not sel:
        return SelectionResult(
            selected=list(range(M)), selected_names=list(data.column_names),
            trajectory=[], stop_reason=StopReason.NONE_SIGNIFICANT_RETURN_ALL,
            criterion=config.criterion, alpha=config.alpha, n_features=M,
        )
    return SelectionResult(
        selected=sel, selected_names=[data.column_names[i] for i in sel],
        trajectory=trajectory, stop_reason=stop,
        criterion=config.criterion, alpha=config.alpha, n_features=M,
    )


def rank_variables(data: Dataset, criterion: Criterion | str = Criterion.PILLAI) -> VariableRanking:
    """Greedy ordering of every column, ignoring the stop threshold.

    Intended for downstream subset choice by cross-validation.  Columns
    that are linearly dependent on earlier picks contribute nothing and
    land at the end in index order.
    """
    criterion = Criterion(criterion)
    cache = _ScatterCache(data)
    M, N, J = data.n_features, cache.N, cache.J
    order: list[int] = []
    stats: list[float] = []
    effective: list[int] = []       # independent columns driving the statistics
    pool = np.arange(M)
    run_lambda = 1.0

    while pool.size:
        if criterion is Criterion.PILLAI:
            inc = _pillai_increments(cache, effective, pool)
            best = int(np.argmax(inc))
            stat = float(inc[best])
            is_active = stat > 0.0
        else:
            if run_lambda == 0.0:
                best, stat, is_active = 0, 0.0, False
            else:
                p = len(effective)
                dof2 = N - J - p
                if dof2 < 1:
                    best, stat, is_active = 0, 0.0, False
                else:
                    partial = _wilks_partials(cache, effective, pool)
                    with np.errstate(divide="ignore"):
                        f_stats = (dof2 / (J - 1.0)) * (1.0 - partial) / partial
                    best = int(np.argmax(f_stats))
                    stat = float(f_stats[best])
                    is_active = partial[best] < 1.0
        chosen = int(pool[best])
        order.append(chosen)
        stats.append(stat)
        if is_active:
            effective.append(chosen)
            if criterion is not Criterion.PILLAI:
                run_lambda = cache.lambda_over(effective)
        pool = pool[pool != chosen]

    return VariableRanking(order=order,
                           names=[data.column_names[i] for i in order],
                           statistics=stats, criterion=criterion)


# ---------------------------------------------------------------------------
# estimator wrapper


class ForwardSelector(BaseEstimator, TransformerMixin):
    """Column selector running forward selection inside ``fit``.

    Parameters mirror :class:`SelectionConfig`.  ``transform`` keeps the
    selected columns in selection order.
    """

    def __init__(self, criterion: str = "pillai", alpha: float = 0.05,
                 max_steps: int | None = None):
        self.criterion = criterion
        self.alpha = alpha
        self.max_steps = max_steps

    def fit(self, X, y, column_names=None):
        X, y = check_X_y(X, y, dtype=float)
        data = Dataset(X, y, column_names)
        config = SelectionConfig(criterion=self.criterion, alpha=self.alpha,
                                 max_steps=self.max_steps)
        self.result_ = forward_select(data, config)
        self.selected_ = np.asarray(self.result_.selected, dtype=int)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "selected_")
        X = check_array(X, dtype=float, ensure_min_samples=0)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, selector was fitted with {self.n_features_in_}"
            )
        return X[:, self.selected_]

    def get_support(self) -> np.ndarray:
        check_is_fitted(self, "selected_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selected_] = True
        return mask
