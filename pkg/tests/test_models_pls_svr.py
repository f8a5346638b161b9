"""PLS and SVR against least squares and geometric expectations."""

import numpy as np
import pytest

from permlab.errors import RankDeficientError
from permlab.models import fit_pls, fit_svr

rng = np.random.default_rng(17)


def _ols_pred(X, y):
    Xc = X - X.mean(0)
    w, *_ = np.linalg.lstsq(Xc, y - y.mean(), rcond=None)
    return Xc @ w + y.mean()


def test_pls_full_rank_equals_ols():
    X = rng.normal(size=(60, 8))
    y = X @ rng.normal(size=8) + 0.05 * rng.normal(size=60)
    m = fit_pls(X, y, 8)
    assert np.allclose(m.predict(X).ravel(), _ols_pred(X, y), atol=1e-6)


def test_pls_first_direction_is_covariance_direction():
    X = rng.normal(size=(50, 4))
    X -= X.mean(0)
    # orthogonalize columns 1..3 against column 0, then y along column 0
    for j in range(1, 4):
        X[:, j] -= X[:, 0] * (X[:, 0] @ X[:, j]) / (X[:, 0] @ X[:, 0])
    y = 2.0 * X[:, 0]
    m = fit_pls(X, y, 1)
    w = m.weights[:, 0]
    w = w / np.sign(w[0])
    assert np.allclose(w, [1, 0, 0, 0], atol=1e-6)


def test_pls_constant_target_zero_coef():
    X = rng.normal(size=(30, 4))
    m = fit_pls(X, np.full(30, 1.0), 3)
    assert np.all(m.coef == 0)
    assert np.allclose(m.predict(X), 1.0)


def test_pls_multi_target_and_missing_cells():
    X = rng.normal(size=(70, 6))
    W = rng.normal(size=(6, 2))
    Y = X @ W
    Ym = Y.copy()
    Ym[::9, 1] = np.nan
    m = fit_pls(X, Ym, 6)
    pred = m.predict(X)
    assert pred.shape == (70, 2)
    # fully observed task is still recovered well
    r = Y[:, 0] - pred[:, 0]
    assert float(r @ r) / float(Y[:, 0] @ Y[:, 0]) < 1e-3


def test_pls_rank_deficient_design():
    # one informative direction but 3 components requested while Y signal
    # lives outside the X span
    base = rng.normal(size=50)
    X = np.column_stack([base, base, base])  # rank 1
    y = rng.normal(size=50)
    with pytest.raises(RankDeficientError):
        fit_pls(X, y, 3)


def test_pls_stops_early_when_target_exhausted():
    # more components requested than the target needs: extraction stops
    # once the Y residual is gone instead of failing
    X = rng.normal(size=(10, 3))
    y = X @ np.array([1.0, -1.0, 0.5])
    m = fit_pls(X, y, 8)
    assert m.weights.shape[1] <= 3
    assert np.allclose(m.predict(X).ravel(), y, atol=1e-8)


def test_svr_linear_large_c_matches_ols():
    X = rng.normal(size=(40, 3))
    y = X @ np.array([1.0, -0.5, 2.0]) + 1.0
    m = fit_svr(X, y, kernel="linear", C=1e4, epsilon=1e-4)
    err = np.abs(m.predict(X).ravel() - _ols_pred(X, y)).max()
    assert err < 1e-2
    assert m.converged


def test_svr_flat_inside_tube():
    X = rng.normal(size=(40, 3))
    y = np.full(40, 2.0) + 0.001 * rng.normal(size=40)
    m = fit_svr(X, y, kernel="rbf", C=1.0, epsilon=0.1)
    # everything fits inside the epsilon tube around the bias
    assert m.support_vectors.shape[0] == 0
    assert np.allclose(m.predict(X), m.bias)
    assert abs(m.bias - 2.0) < 0.01


def test_svr_single_point():
    m = fit_svr(np.array([[1.0, 2.0]]), np.array([5.0]), kernel="rbf", C=10.0, epsilon=0.001)
    assert abs(m.predict(np.array([[1.0, 2.0]]))[0, 0] - 5.0) < 1e-6


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_svr_kernels_run_and_predict_shape():
    X = rng.normal(size=(25, 4))
    y = np.sin(X[:, 0]) + X[:, 1]
    for kernel, extra in (
        ("linear", {}),
        ("rbf", {"gamma": 0.5}),
        ("poly", {"degree": 2, "gamma": "scale"}),
        ("sigmoid", {"gamma": 0.1}),
    ):
        m = fit_svr(X, y, kernel=kernel, C=5.0, epsilon=0.05, **extra)
        assert m.predict(X).shape == (25, 1)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_svr_epsilon_widens_tube_drops_supports():
    X = rng.normal(size=(50, 2))
    y = X @ np.array([1.0, 1.0]) + 0.05 * rng.normal(size=50)
    tight = fit_svr(X, y, kernel="linear", C=10.0, epsilon=0.001)
    loose = fit_svr(X, y, kernel="linear", C=10.0, epsilon=1.0)
    assert loose.support_vectors.shape[0] <= tight.support_vectors.shape[0]


def test_svr_unknown_kernel():
    with pytest.raises(Exception):
        fit_svr(np.ones((3, 1)), np.ones(3), kernel="cubic")
