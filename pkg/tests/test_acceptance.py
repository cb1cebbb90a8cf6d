"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see per-criterion
output.  The Monte-Carlo criteria use smoke-scale replication counts where
the criterion allows them; tolerances are stated inline.
"""

import json
import math
import time

import numpy as np
import pandas as pd
import pytest
from scipy.integrate import quad
from scipy.linalg import eigh
from scipy.stats import beta as beta_dist
from scipy.stats import f as f_dist

from ulda import (
    Dataset,
    UldaClassifier,
    class_stats,
    fit_ulda,
    forward_select,
    pillai_trace,
    scatter_factors,
    SelectionConfig,
    StopReason,
)
from ulda.experiments import (
    bench_ulda,
    ks_asymptotic,
    one_hot_dummies,
    sim_partial_f,
    sim_type1,
    substream,
    two_group_pattern,
)
from ulda.preprocess import Recipe, apply_recipe, fit_recipe
from ulda.special import beta_cdf, f_sf, log_beta


def report(n, message):
    print(f"\nACCEPTANCE criterion {n}: PASS - {message}")


def random_problem(rng, n_max=200, m_max=20, j_max=6):
    m = int(rng.integers(1, m_max + 1))
    j = int(rng.integers(2, j_max + 1))
    n = int(rng.integers(m + j + 2, n_max + 1)) if m + j + 2 < n_max else m + j + 2
    y = rng.integers(0, j, n)
    while np.unique(y).size < j:
        y = rng.integers(0, j, n)
    X = rng.standard_normal((n, m)) + 1.5 * rng.standard_normal((j, m))[y]
    return X, y


def full_factors(X, y):
    data = Dataset(X, y)
    cols = np.arange(data.n_features)
    return scatter_factors(data, class_stats(data, cols), cols)


def test_c01_diagonalization_suite():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    for _ in range(200):
        X, y = random_problem(rng)
        model = UldaClassifier().fit(X, y)
        fa = full_factors(X, y)
        W = model.W_
        t2 = W.shape[1]
        StW = W.T @ fa.St @ W
        SbW = W.T @ fa.Sb @ W
        SwW = W.T @ fa.Sw @ W
        assert np.abs(StW - np.eye(t2)).max() < 1e-7
        assert np.abs(SbW - np.diag(np.diag(SbW))).max() < 1e-7
        assert np.abs(SwW - np.diag(np.diag(SwW))).max() < 1e-7
        assert np.abs(model.alpha_sq_ + model.beta_sq_ - 1.0).max() < 1e-7
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report(1, f"200 random fits satisfy the diagonalization contract "
              f"at 1e-7 in {elapsed:.1f}s")


def fisher_eigenproblem_predict(X, y):
    """Reference classifier from the generalized eigenproblem on (Sb, Sw)."""
    classes, first = np.unique(y, return_index=True)
    classes = classes[np.argsort(first)]
    J = len(classes)
    N = len(y)
    fa = full_factors(X, y)
    vals, vecs = eigh(fa.Sb, fa.Sw)
    V = vecs[:, ::-1][:, :J - 1]          # leading discriminant directions
    Z = X @ V
    means = np.array([Z[y == c].mean(axis=0) for c in classes])
    # eigh normalizes v' Sw v = 1, so the pooled covariance in this space
    # is the identity over (N - J)
    scale = N - J
    A = means * scale
    const = -0.5 * np.sum(means * A, axis=1) + np.log(
        np.array([(y == c).mean() for c in classes]))
    return classes[np.argmax(Z @ A.T + const, axis=1)]


def test_c02_classical_lda_equivalence():
    rng = np.random.default_rng(202)
    checked = 0
    while checked < 50:
        X, y = random_problem(rng, n_max=150, m_max=10, j_max=5)
        fa = full_factors(X, y)
        if np.linalg.matrix_rank(fa.Sw) < X.shape[1]:
            continue
        model = UldaClassifier().fit(X, y)
        np.testing.assert_array_equal(model.predict(X),
                                      fisher_eigenproblem_predict(X, y))
        checked += 1
    report(2, "ULDA matches the Fisher-eigenproblem reference on 100% of "
              "training points across 50 nonsingular fits")


def test_c03_trace_monotonicity():
    rng = np.random.default_rng(303)
    pairs = 0
    while pairs < 500:
        X, y = random_problem(rng, n_max=60, m_max=8, j_max=4)
        data = Dataset(X, y)
        order = rng.permutation(data.n_features)
        prev = 0.0
        for k in range(1, data.n_features + 1):
            cols = order[:k]
            cur = pillai_trace(scatter_factors(data, class_stats(data, cols), cols))
            assert cur >= prev - 1e-9
            prev = cur
        pairs += 1
    report(3, "Pillai's trace non-decreasing over 500 random "
              "(dataset, column-order) pairs at tolerance -1e-9")


def test_c04_null_calibration():
    n, j, reps = 150, 3, 10_000
    values = np.empty(reps)
    for rep in range(reps):
        rng = substream(404, "null", rep)
        y = rng.integers(0, j, n)
        while np.unique(y).size < j:
            y = rng.integers(0, j, n)
        data = Dataset(rng.standard_normal((n, 1)), y)
        values[rep] = pillai_trace(
            scatter_factors(data, class_stats(data, [0]), [0]))
    stat, p = ks_asymptotic(values, lambda q: beta_dist.cdf(q, 1.0, 73.5))
    assert p > 0.01
    report(4, f"10,000 single-variable null traces pass KS vs Beta(1, 73.5) "
              f"(statistic {stat:.4f}, p {p:.3f})")


def test_c05_partial_f_bias_directions():
    start = time.perf_counter()
    frame = sim_partial_f(reps=10_000, seed=505)
    two = frame[frame.scenario == "two-variable"]
    s1 = two[two.step == 1].partial_f.to_numpy()
    s2 = two[two.step == 2].partial_f.to_numpy()
    _, p1 = ks_asymptotic(s1, lambda q: f_dist.cdf(q, 2, 147))
    _, p2 = ks_asymptotic(s2, lambda q: f_dist.cdf(q, 2, 146))
    assert p1 < 0.01 and s1.mean() > 147.0 / 145.0      # biased upward
    assert p2 < 0.01 and s2.mean() < 146.0 / 144.0      # biased downward
    one = frame[frame.scenario == "one-variable"].partial_f.to_numpy()
    _, p_one = ks_asymptotic(one, lambda q: f_dist.cdf(q, 2, 147))
    assert p_one > 0.01                                  # no selection, no bias
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    report(5, f"step-1 partial F biased above F(2,147) and step-2 below "
              f"F(2,146), KS rejections at 1% (in {elapsed:.0f}s)")


def test_c06_family_wise_error_control():
    reps = 500
    se = math.sqrt(0.05 * 0.95 / reps)
    bound = 0.05 + 2.0 * se
    summaries = []
    for scenario in ("iris-plus-noise", "pure-noise"):
        frame = sim_type1(scenario=scenario, reps=reps, seed=606)
        for variant in ("pillai", "wilks-bonferroni"):
            rates = frame[frame.variant == variant].type1_rate
            assert (rates <= bound).all(), (scenario, variant, rates.tolist())
        wilks = frame[frame.variant == "wilks"].sort_values("m_noise")
        rates = wilks.type1_rate.to_numpy()
        halves = wilks.ci_halfwidth.to_numpy()
        m_vals = wilks.m_noise.to_numpy()
        assert (rates[m_vals >= 16] > bound).all()
        for i in range(len(rates) - 1):
            slack = 2.0 * math.sqrt((halves[i] / 1.96) ** 2 + (halves[i + 1] / 1.96) ** 2)
            assert rates[i + 1] >= rates[i] - slack
        summaries.append(f"{scenario}: wilks up to {rates.max():.2f}")
    report(6, f"Pillai and Wilks-Bonferroni stay under {bound:.4f} for all M; "
              f"plain Wilks inflates ({'; '.join(summaries)})")


def test_c07_one_hot_scenario_exact():
    data = one_hot_dummies(substream(707, "one-hot"))
    pillai = forward_select(data, SelectionConfig(criterion="pillai"))
    assert len(pillai.selected) == 9
    assert abs(pillai.trajectory[-1].pillai_after - 9.0) <= 1e-6
    assert pillai.stop_reason is StopReason.MAX_TRACE_REACHED

    sub = Dataset(data.X[:, pillai.selected], data.y,
                  [data.column_names[c] for c in pillai.selected])
    model = fit_ulda(sub)
    assert np.mean(model.predict(sub.X) == sub.y) == 1.0

    rng = substream(707, "folds")
    idx = rng.permutation(data.n_obs)
    hits = 0
    for fold in range(10):
        test = idx[fold::10]
        train = np.setdiff1d(idx, test)
        fold_model = UldaClassifier().fit(sub.X[train], sub.y[train])
        hits += int(np.sum(fold_model.predict(sub.X[test]) == sub.y[test]))
    assert hits == data.n_obs

    wilks = forward_select(data, SelectionConfig(criterion="wilks"))
    assert len(wilks.selected) == 1
    assert wilks.stop_reason is StopReason.WILKS_ZERO_STOP
    report(7, "Pillai takes 9 dummies to trace 9 with perfect training and "
              "10-fold CV accuracy; Wilks stops at one column with the "
              "zero-lambda stop")


def test_c08_two_group_pattern():
    data = two_group_pattern(substream(808, "pattern"))
    pillai = forward_select(data, SelectionConfig(criterion="pillai"))
    sub_p = Dataset(data.X[:, pillai.selected], data.y,
                    [data.column_names[c] for c in pillai.selected])
    acc_p = np.mean(fit_ulda(sub_p).predict(sub_p.X) == data.y)
    assert acc_p == 1.0

    wilks = forward_select(data, SelectionConfig(criterion="wilks"))
    sub_w = Dataset(data.X[:, wilks.selected], data.y,
                    [data.column_names[c] for c in wilks.selected])
    pred_w = fit_ulda(sub_w).predict(sub_w.X)
    bc = np.isin(data.y, ["B", "C"])
    acc_bc = np.mean(pred_w[bc] == data.y[bc])
    assert acc_bc <= 2.0 / 3.0 + 0.01
    report(8, f"Pillai subset separates all three classes (accuracy 1.0); "
              f"Wilks subset scores {acc_bc:.2f} on the B/C subproblem")


def test_c09_runtime_benchmark():
    frame = bench_ulda(n_obs=10_000, m_list=(1024,), reps=5, seed=909)
    assert frame.agree.all()
    median_plain = frame.seconds_gsvd.median()
    median_qr = frame.seconds_qr.median()
    assert median_qr < median_plain
    report(9, f"QR-reduced fit median {median_qr:.2f}s beats plain "
              f"{median_plain:.2f}s at N=10000, M=1024 with 100% "
              f"prediction agreement")


def beta_cdf_quadrature(x, a, b):
    lnB = log_beta(a, b)

    def density(t):
        if t <= 0.0 or t >= 1.0:
            return 0.0
        return math.exp((a - 1.0) * math.log(t) + (b - 1.0) * math.log1p(-t) - lnB)

    val, _ = quad(density, 0.0, x, epsabs=1e-13, epsrel=1e-12, limit=300)
    return val


def test_c10_special_functions():
    grid = np.linspace(0.015, 0.985, 50)
    worst = 0.0
    for a in (0.5, 1.0, 5.0, 73.5):
        for b in (0.5, 1.0, 5.0, 73.5):
            for x in grid:
                err = abs(beta_cdf(float(x), a, b) - beta_cdf_quadrature(float(x), a, b))
                worst = max(worst, err)
                assert err <= 1e-10
    assert round(f_sf(4.0, 2, 147), 2) == 0.02
    report(10, f"beta CDF within {worst:.1e} of quadrature on the 50-point "
               f"grid over all 16 (a, b) pairs; F(2,147) tail at 4 rounds "
               f"to 0.02")


def test_c11_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(1111)
    n = 90
    raw = pd.DataFrame({
        "length": rng.normal(10, 2, n),
        "kind": rng.choice(["alpha", "beta", "gamma"], n),
        "heading": rng.uniform(0, 360, n),
    })
    raw.loc[rng.choice(n, 6, replace=False), "length"] = np.nan
    y = np.where(raw["length"].fillna(10) + rng.normal(0, 1, n) > 10, "hi", "lo")

    recipe = fit_recipe(raw, cyclic={"heading": 360.0})
    encoded = apply_recipe(recipe, raw)
    model = UldaClassifier().fit(encoded.to_numpy(), y,
                                 column_names=list(encoded.columns))

    model_path = tmp_path / "model.json"
    recipe_path = tmp_path / "recipe.json"
    model_path.write_text(json.dumps(model.to_json()))
    recipe_path.write_text(json.dumps(recipe.to_json()))

    model2 = UldaClassifier.from_json(json.loads(model_path.read_text()))
    recipe2 = Recipe.from_json(json.loads(recipe_path.read_text()))
    encoded2 = apply_recipe(recipe2, raw)

    assert np.array_equal(encoded.to_numpy(), encoded2.to_numpy())
    assert np.array_equal(model.predict(encoded.to_numpy()),
                          model2.predict(encoded2.to_numpy()))
    assert np.array_equal(model.predict_proba(encoded.to_numpy()),
                          model2.predict_proba(encoded2.to_numpy()))
    report(11, "model + recipe JSON reload reproduces predictions and "
               "posteriors bit-for-bit on the training table")
