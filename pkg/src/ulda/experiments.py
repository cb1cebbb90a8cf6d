"""Seedable Monte-Carlo experiments emitting plot-ready CSV tables.

Included studies: the distribution of the stepwise partial-F statistic
under the null, family-wise type-I error rates of the three forward
selection variants on iris-plus-noise and pure-noise designs, the
perfect-separation scenarios where the legacy criterion stops early, and
the runtime benchmark of the two fit paths.

Every experiment derives one RNG substream per replicate from
``(seed, scenario, ...)`` so results are reproducible and independent of
execution order.  KS tests use the asymptotic Kolmogorov distribution
(sample sizes here are in the thousands).
"""

import time
import zlib
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import ks_1samp

from .model import UldaClassifier, fit_ulda
from .scatter import Dataset, class_stats, scatter_factors
from .selection import Criterion, SelectionConfig, _ScatterCache, _run_selection, forward_select
from .stats import wilks_lambda
from .datasets import load_iris_arrays

__all__ = [
    "sim_partial_f",
    "sim_type1",
    "sim_lambda_zero",
    "bench_ulda",
    "ks_asymptotic",
    "two_group_pattern",
    "one_hot_dummies",
]

TYPE1_M_GRID = (1, 2, 4, 8, 16, 32, 64, 128)
BENCH_M_GRID = (2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)


def substream(seed: int, *path) -> np.random.Generator:
    """Independent generator for one replicate, keyed by (seed, path)."""
    key = [int(seed)]
    for part in path:
        if isinstance(part, str):
            key.append(zlib.crc32(part.encode("utf-8")))
        else:
            key.append(int(part))
    return np.random.default_rng(np.random.SeedSequence(key))


def ks_asymptotic(samples, cdf) -> tuple[float, float]:
    """One-sample KS statistic and asymptotic p-value against ``cdf``."""
    res = ks_1samp(samples, cdf, method="asymp")
    return float(res.statistic), float(res.pvalue)


def _uniform_labels(rng: np.random.Generator, n: int, j: int) -> np.ndarray:
    """IID equiprobable labels, redrawn until every class appears."""
    while True:
        y = rng.integers(0, j, size=n)
        if np.unique(y).size == j:
            return y


def _write(frame: pd.DataFrame, out_dir, name: str, seed: int) -> None:
    if out_dir is None:
        return
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_dir / f"{name}_seed{seed}.csv", index=False)


# ---------------------------------------------------------------------------
# partial-F distribution under stepwise selection


def _single_column_lambda(x: np.ndarray, y_index: np.ndarray, j: int) -> float:
    grand = x.mean()
    st = float(np.sum((x - grand) ** 2))
    sw = 0.0
    for cls in range(j):
        xc = x[y_index == cls]
        sw += float(np.sum((xc - xc.mean()) ** 2))
    return sw / st


def sim_partial_f(reps: int = 10_000, seed: int = 42, out_dir=None) -> pd.DataFrame:
    """Draws of the stepwise partial-F statistic under the null.

    One-variable scenario: no selection happens, the statistic follows its
    F reference.  Two-variable scenario: step 1 takes the larger of two F
    statistics (biased upward) and step 2 gets the remainder (biased
    downward).  N=150 observations, J=3 equiprobable classes per round.
    """
    n, j = 150, 3
    rows = []
    for rep in range(reps):
        rng = substream(seed, "partial-f", "one", rep)
        y = _uniform_labels(rng, n, j)
        lam = _single_column_lambda(rng.standard_normal(n), y, j)
        f1 = ((n - j) / (j - 1)) * (1.0 - lam) / lam
        rows.append(("one-variable", rep, 1, f1))
    for rep in range(reps):
        rng = substream(seed, "partial-f", "two", rep)
        y = _uniform_labels(rng, n, j)
        X = rng.standard_normal((n, 2))
        data = Dataset(X, y, ["x1", "x2"])
        lams = np.array([
            wilks_lambda(scatter_factors(data, class_stats(data, [c]), [c]))
            for c in (0, 1)
        ])
        first = int(np.argmin(lams))          # larger partial F
        lam1 = float(lams[first])
        f1 = ((n - j) / (j - 1)) * (1.0 - lam1) / lam1
        both = scatter_factors(data, class_stats(data, [0, 1]), [0, 1])
        lam12 = wilks_lambda(both)
        partial2 = lam12 / lam1
        f2 = ((n - j - 1) / (j - 1)) * (1.0 - partial2) / partial2
        rows.append(("two-variable", rep, 1, f1))
        rows.append(("two-variable", rep, 2, f2))
    frame = pd.DataFrame(rows, columns=["scenario", "round", "step", "partial_f"])
    frame.insert(0, "n_obs", n)
    frame.insert(1, "n_classes", j)
    _write(frame, out_dir, "partial_f", seed)
    return frame


# ---------------------------------------------------------------------------
# family-wise type-I error


def sim_type1(scenario: str = "pure-noise", m_list=TYPE1_M_GRID, reps: int = 2000,
              variants=("pillai", "wilks", "wilks-bonferroni"), alpha: float = 0.05,
              seed: int = 42, out_dir=None) -> pd.DataFrame:
    """Family-wise type-I error of the forward-selection variants.

    ``iris-plus-noise`` keeps the four iris features and appends M
    independent standard-normal columns; ``pure-noise`` keeps only the
    noise.  A replicate counts as an error when at least one noise column
    passes the criterion.  Reports the error fraction and a 95% CI
    half-width per (variant, M).
    """
    if scenario not in ("iris-plus-noise", "pure-noise"):
        raise ValueError(f"unknown scenario {scenario!r}")
    iris_X, iris_y, iris_names = load_iris_arrays()
    variants = [Criterion(v) for v in variants]
    errors = {(v, m): 0 for v in variants for m in m_list}
    for m in m_list:
        for rep in range(reps):
            rng = substream(seed, "type1", scenario, m, rep)
            noise = rng.standard_normal((iris_X.shape[0], m))
            noise_names = [f"noise{i}" for i in range(m)]
            if scenario == "iris-plus-noise":
                X = np.hstack([iris_X, noise])
                names = iris_names + noise_names
                noise_from = len(iris_names)
            else:
                X, names, noise_from = noise, noise_names, 0
            cache = _ScatterCache(Dataset(X, iris_y, names))
            for variant in variants:
                res = _run_selection(cache, SelectionConfig(criterion=variant, alpha=alpha))
                if any(c >= noise_from for c in res.significant_columns):
                    errors[(variant, m)] += 1
    rows = []
    for variant in variants:
        for m in m_list:
            rate = errors[(variant, m)] / reps
            half = 1.96 * np.sqrt(rate * (1.0 - rate) / reps)
            rows.append((scenario, variant.value, m, reps, alpha, rate, half))
    frame = pd.DataFrame(rows, columns=[
        "scenario", "variant", "m_noise", "reps", "alpha", "type1_rate", "ci_halfwidth",
    ])
    _write(frame, out_dir, f"type1_{scenario}", seed)
    return frame


# ---------------------------------------------------------------------------
# perfect-separation scenarios


def one_hot_dummies(rng: np.random.Generator, n: int = 2000, j: int = 10) -> Dataset:
    """Class labels one-hot encoded and used as their own features."""
    y = _uniform_labels(rng, n, j)
    X = np.eye(j)[y]
    return Dataset(X, y, [f"is_class_{c}" for c in range(j)])


def two_group_pattern(rng: np.random.Generator, n_per_class: int = 50) -> Dataset:
    """Three classes where one binary feature splits A from B and C.

    ``group`` is constant within every class (A at 0, B and C at 1), so
    it alone drives Wilks' lambda to zero; ``position`` separates B from C
    with a clear margin (and leaves A in the middle).
    """
    n = 3 * n_per_class
    y = np.repeat(np.array(["A", "B", "C"]), n_per_class)
    group = np.repeat([0.0, 1.0, 1.0], n_per_class)
    centers = np.repeat([0.0, -1.0, 1.0], n_per_class)
    position = centers + rng.uniform(-0.3, 0.3, size=n)
    X = np.column_stack([position, group])
    perm = rng.permutation(n)
    return Dataset(X[perm], y[perm], ["position", "group"])


def _binary_perfect(rng: np.random.Generator, n: int = 100) -> Dataset:
    y = _uniform_labels(rng, n, 2)
    X = np.column_stack([y.astype(float), rng.standard_normal(n)])
    return Dataset(X, y, ["indicator", "noise"])


def _cv_accuracy(data: Dataset, cols, folds: int, rng: np.random.Generator,
                 solver: str = "qr") -> float:
    idx = rng.permutation(data.n_obs)
    hits = 0
    for f in range(folds):
        test = idx[f::folds]
        train = np.setdiff1d(idx, test)
        sub = Dataset(data.X[np.ix_(train, cols)], data.y[train],
                      [data.column_names[c] for c in cols])
        model = fit_ulda(sub, solver=solver)
        pred = model.predict(data.X[np.ix_(test, cols)])
        hits += int(np.sum(pred == data.y[test]))
    return hits / data.n_obs


def sim_lambda_zero(seed: int = 42, cv_folds: int = 10, out_dir=None) -> pd.DataFrame:
    """Selection and accuracy when some class split is perfectly separable.

    Runs the one-hot dummy design, the three-class two-group pattern and a
    binary perfectly-separated control through the Pillai and Wilks
    criteria, then fits the classifier on each selected set.
    ``subgroup_accuracy`` is the accuracy restricted to the B/C rows of
    the two-group pattern (nan elsewhere).
    """
    scenarios = {
        "one-hot": one_hot_dummies(substream(seed, "lambda-zero", "one-hot")),
        "two-group-pattern": two_group_pattern(substream(seed, "lambda-zero", "pattern")),
        "binary-perfect": _binary_perfect(substream(seed, "lambda-zero", "binary")),
    }
    rows = []
    for name, data in scenarios.items():
        for criterion in (Criterion.PILLAI, Criterion.WILKS):
            res = forward_select(data, SelectionConfig(criterion=criterion))
            cols = res.selected
            sub = Dataset(data.X[:, cols], data.y, [data.column_names[c] for c in cols])
            model = fit_ulda(sub)
            pred = model.predict(sub.X)
            train_acc = float(np.mean(pred == data.y))
            cv_acc = _cv_accuracy(data, cols, cv_folds,
                                  substream(seed, "lambda-zero", name, criterion.value))
            if name == "two-group-pattern":
                bc = np.isin(data.y, ["B", "C"])
                sub_acc = float(np.mean(pred[bc] == data.y[bc]))
            else:
                sub_acc = float("nan")
            final_pillai = res.trajectory[-1].pillai_after if res.trajectory else 0.0
            rows.append((name, criterion.value, len(cols),
                         ";".join(res.selected_names), res.stop_reason.value,
                         final_pillai, train_acc, cv_acc, sub_acc))
    frame = pd.DataFrame(rows, columns=[
        "scenario", "criterion", "n_selected", "selected", "stop_reason",
        "final_pillai", "train_accuracy", "cv_accuracy", "subgroup_accuracy",
    ])
    _write(frame, out_dir, "lambda_zero", seed)
    return frame


# ---------------------------------------------------------------------------
# runtime benchmark


def bench_ulda(n_obs: int = 10_000, m_list=BENCH_M_GRID, reps: int = 30,
               n_classes: int = 10, seed: int = 42, out_dir=None) -> pd.DataFrame:
    """Wall-time of the plain versus QR-reduced fit, with agreement check.

    Standard-normal features, equiprobable classes.  Timings are
    hardware-dependent; the prediction-agreement column is not.
    """
    rows = []
    for m in m_list:
        for rep in range(reps):
            rng = substream(seed, "bench", m, rep)
            y = _uniform_labels(rng, n_obs, n_classes)
            X = rng.standard_normal((n_obs, m))
            t0 = time.perf_counter()
            plain = UldaClassifier(solver="gsvd").fit(X, y)
            t_plain = time.perf_counter() - t0
            t0 = time.perf_counter()
            reduced = UldaClassifier(solver="qr").fit(X, y)
            t_qr = time.perf_counter() - t0
            agree = bool(np.array_equal(plain.predict(X), reduced.predict(X)))
            rows.append((n_obs, n_classes, m, rep, t_plain, t_qr, agree))
    frame = pd.DataFrame(rows, columns=[
        "n_obs", "n_classes", "m_features", "rep", "seconds_gsvd", "seconds_qr", "agree",
    ])
    _write(frame, out_dir, "bench", seed)
    return frame
