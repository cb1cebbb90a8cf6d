import numpy as np
import pytest

from ulda import Dataset, class_stats, scatter_factors

from conftest import random_dataset


def test_constant_class_means_equal_rows():
    X = np.tile([1.5, -2.0, 7.0], (4, 1))
    X = np.vstack([X, np.zeros((3, 3))])
    y = np.array(["a"] * 4 + ["b"] * 3)
    stats = class_stats(Dataset(X, y), [0, 1, 2])
    assert np.array_equal(stats.class_means[0], [1.5, -2.0, 7.0])
    assert np.array_equal(stats.class_means[1], [0.0, 0.0, 0.0])


def test_two_point_symmetry():
    X = np.array([[0.0], [0.0], [2.0], [2.0]])
    y = np.array([0, 0, 1, 1])
    stats = class_stats(Dataset(X, y), [0])
    assert stats.class_means[0, 0] == 0.0
    assert stats.class_means[1, 0] == 2.0
    assert stats.grand_mean[0] == 1.0


def test_means_match_direct_averaging(rng):
    X = rng.standard_normal((20, 3))
    y = rng.integers(0, 2, 20)
    y[:2] = [0, 1]
    stats = class_stats(Dataset(X, y), [0, 1, 2])
    for j in range(2):
        np.testing.assert_allclose(stats.class_means[j], X[y == j].mean(axis=0),
                                   rtol=1e-12)
    np.testing.assert_allclose(stats.grand_mean, X.mean(axis=0), rtol=1e-12)
    counts = stats.class_counts
    np.testing.assert_allclose(stats.grand_mean,
                               counts @ stats.class_means / counts.sum(), rtol=1e-10)


def test_equal_class_means_give_zero_between_scatter():
    # mirror-image classes share every mean
    base = np.array([[1.0, 2.0], [-1.0, -2.0], [3.0, 0.0], [-3.0, 0.0]])
    X = np.vstack([base, base])
    y = np.array([0] * 4 + [1] * 4)
    data = Dataset(X, y)
    fa = scatter_factors(data, class_stats(data, [0, 1]), [0, 1])
    assert np.abs(fa.Sb).max() < 1e-12


def test_observations_at_class_means_give_zero_within_scatter():
    X = np.array([[1.0, 0.0]] * 3 + [[0.0, 5.0]] * 4)
    y = np.array([0] * 3 + [1] * 4)
    data = Dataset(X, y)
    fa = scatter_factors(data, class_stats(data, [0, 1]), [0, 1])
    assert np.abs(fa.Sw).max() == 0.0


def test_scatter_matches_double_sum_oracle(rng):
    X = rng.standard_normal((30, 4))
    y = rng.integers(0, 3, 30)
    y[:3] = [0, 1, 2]
    data = Dataset(X, y)
    cols = [0, 1, 2, 3]
    stats = class_stats(data, cols)
    fa = scatter_factors(data, stats, cols)

    # explicit double-sum oracle
    grand = X.mean(axis=0)
    Sb = np.zeros((4, 4))
    Sw = np.zeros((4, 4))
    for j in range(3):
        rows = X[y == j]
        d = rows.mean(axis=0) - grand
        Sb += len(rows) * np.outer(d, d)
        for x in rows:
            e = x - rows.mean(axis=0)
            Sw += np.outer(e, e)
    np.testing.assert_allclose(fa.Sb, Sb, atol=1e-10)
    np.testing.assert_allclose(fa.Sw, Sw, atol=1e-10)
    np.testing.assert_allclose(fa.St, Sb + Sw, atol=1e-10)


def test_factor_products_and_st_identity(rng):
    for _ in range(30):
        data = random_dataset(rng)
        cols = np.arange(data.n_features)
        fa = scatter_factors(data, class_stats(data, cols), cols)
        np.testing.assert_allclose(fa.Sb, fa.Hb.T @ fa.Hb, atol=1e-10)
        np.testing.assert_allclose(fa.Sw, fa.Hw.T @ fa.Hw, atol=1e-10)
        # St from raw deviations about the grand mean
        D = data.X - data.X.mean(axis=0)
        St_direct = D.T @ D
        denom = max(np.linalg.norm(St_direct), 1.0)
        assert np.linalg.norm(fa.St - St_direct) / denom < 1e-9


def test_quadratic_forms_nonnegative(rng):
    data = random_dataset(rng)
    cols = np.arange(data.n_features)
    fa = scatter_factors(data, class_stats(data, cols), cols)
    for _ in range(100):
        v = rng.standard_normal(data.n_features)
        assert v @ fa.Sb @ v >= -1e-9
        assert v @ fa.St @ v >= -1e-9


def test_between_scatter_rank_bound(rng):
    for _ in range(20):
        data = random_dataset(rng)
        cols = np.arange(data.n_features)
        fa = scatter_factors(data, class_stats(data, cols), cols)
        s = np.linalg.svd(fa.Sb, compute_uv=False)
        tol = max(fa.n_obs, data.n_features) * np.finfo(float).eps * max(s[0], 1.0)
        assert np.sum(s > tol) <= data.n_classes - 1


def test_validation_errors(rng):
    data = Dataset(rng.standard_normal((12, 3)), np.arange(12) % 2)
    with pytest.raises(ValueError):
        class_stats(data, [])
    with pytest.raises(IndexError):
        class_stats(data, [data.n_features])
    stats = class_stats(data, [0])
    with pytest.raises(ValueError):
        scatter_factors(data, stats, [0, 1, 2])
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.array([0, 0, 0]))  # single class
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.array([0.0, np.nan, 1.0]))  # missing label
