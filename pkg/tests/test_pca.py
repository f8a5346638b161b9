"""PCA fit/transform against linear-algebra ground truth."""

import numpy as np
import pytest

from permlab.errors import DegenerateInputError, DimensionMismatchError
from permlab.pca import pca_fit, pca_transform


def test_rank_one_line():
    t = np.linspace(-2, 2, 9)
    X = np.column_stack([t, 2 * t])
    model = pca_fit(X, 1)
    v = model.components[0]
    expect = np.array([1.0, 2.0]) / np.sqrt(5.0)
    assert np.allclose(v, expect, atol=1e-12)
    assert model.explained_variance_ratio[0] == pytest.approx(1.0)


def test_matches_covariance_eigendecomposition():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(6, 40))
        d = int(rng.integers(2, 10))
        X = rng.standard_normal((n, d)) * rng.uniform(0.5, 3.0, size=d)
        k = int(rng.integers(1, min(n, d) + 1))
        model = pca_fit(X, k)
        C = np.cov(X, rowvar=False, ddof=1)
        evals, evecs = np.linalg.eigh(C)
        evals, evecs = evals[::-1], evecs[:, ::-1]
        ratios = evals / evals.sum()
        assert np.allclose(model.explained_variance_ratio, ratios[:k], atol=1e-8)
        for i in range(k):
            v = evecs[:, i]
            j = int(np.argmax(np.abs(v)))
            if v[j] < 0:
                v = -v
            assert np.allclose(model.components[i], v, atol=1e-8) or np.isclose(
                evals[i], evals[i + 1] if i + 1 < d else -1, atol=1e-10
            )


def test_sign_convention():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((30, 5))
    model = pca_fit(X, 5)
    for row in model.components:
        assert row[np.argmax(np.abs(row))] > 0


def test_scores_variance_and_centering():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((40, 6)) * [5, 3, 2, 1, 0.5, 0.1]
    model = pca_fit(X, 4)
    scores = pca_transform(model, X)
    assert np.allclose(scores.mean(0), 0.0, atol=1e-12)
    var = scores.var(axis=0, ddof=1)
    expect = model.singular_values**2 / (model.n_samples - 1)
    assert np.allclose(var, expect, atol=1e-10)
    # scores of distinct components are uncorrelated
    G = scores.T @ scores
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() < 1e-8


def test_reconstruction_with_full_rank():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((15, 4))
    model = pca_fit(X, 4)
    scores = pca_transform(model, X)
    back = scores @ model.components + model.column_means
    assert np.allclose(back, X, atol=1e-10)


def test_row_permutation_invariance():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((25, 5))
    ref = pca_fit(X, 3)
    perm = rng.permutation(25)
    other = pca_fit(X[perm], 3)
    assert np.allclose(ref.components, other.components, atol=1e-10)
    assert np.allclose(
        ref.explained_variance_ratio, other.explained_variance_ratio, atol=1e-12
    )


def test_nan_rows_dropped_and_reported():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((12, 4))
    X[3, 1] = np.nan
    X[8, 0] = np.nan
    model = pca_fit(X, 2)
    assert model.dropped_rows == (3, 8)
    assert model.n_samples == 10
    clean = pca_fit(np.delete(X, [3, 8], axis=0), 2)
    assert np.allclose(model.components, clean.components, atol=1e-12)


def test_transform_single_row_and_mismatch():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((10, 3))
    model = pca_fit(X, 2)
    mean_score = pca_transform(model, model.column_means)
    assert mean_score.shape == (1, 2)
    assert np.allclose(mean_score, 0.0, atol=1e-12)
    with pytest.raises(DimensionMismatchError):
        pca_transform(model, np.zeros((2, 4)))


def test_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        pca_fit(np.ones((5, 3)), 1)  # no variance
    with pytest.raises(DegenerateInputError):
        pca_fit(np.zeros((1, 3)), 1)  # one row
    with pytest.raises(DegenerateInputError):
        pca_fit(np.random.default_rng(0).standard_normal((5, 3)), 4)  # k too big
    X = np.random.default_rng(0).standard_normal((4, 3))
    X[:3] = np.nan
    with pytest.raises(DegenerateInputError):
        pca_fit(X, 1)  # too few complete rows survive


def test_ratio_ordering_and_sum():
    rng = np.random.default_rng(13)
    X = rng.standard_normal((50, 8))
    model = pca_fit(X, 8)
    r = model.explained_variance_ratio
    assert np.all(np.diff(r) <= 1e-12)
    assert r.sum() == pytest.approx(1.0)
