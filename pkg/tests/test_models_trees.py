"""CART, random forest, and boosted trees."""

import numpy as np
import pytest

from permlab.errors import NonFiniteError
from permlab.models import fit_decision_tree, fit_gbt, fit_random_forest

rng = np.random.default_rng(31)


def test_tree_splits_at_midpoint():
    X = np.linspace(-1, 1, 8)[:, None]
    y = (X.ravel() > 0).astype(float)
    m = fit_decision_tree(X, y)
    mid = (X.ravel()[3] + X.ravel()[4]) / 2
    assert abs(m.tree.threshold[0] - mid) < 1e-12
    assert np.allclose(m.predict(X).ravel(), y)


def test_tree_constant_target_single_leaf():
    X = np.linspace(-1, 1, 8)[:, None]
    m = fit_decision_tree(X, np.full(8, 2.5))
    assert m.tree.node_count == 1
    assert np.allclose(m.predict(X), 2.5)


def test_tree_min_samples_leaf():
    X = np.arange(10, dtype=float)[:, None]
    y = (X.ravel() >= 9).astype(float)  # only one sample in the high class
    m = fit_decision_tree(X, y, min_samples_leaf=2)
    # the 9-vs-rest split is forbidden, so the boundary moves left
    leaf_sizes = []

    def walk(node=0):
        if m.tree.feature[node] < 0:
            return
        walk(m.tree.left[node])
        walk(m.tree.right[node])

    walk()
    pred = m.predict(X).ravel()
    assert len(set(pred.tolist())) <= 5  # coarser than 1-sample leaves allow


def test_tree_min_samples_split_stops_growth():
    X = rng.normal(size=(16, 2))
    y = rng.normal(size=16)
    full = fit_decision_tree(X, y, min_samples_split=2)
    stopped = fit_decision_tree(X, y, min_samples_split=17)
    assert stopped.tree.node_count == 1
    assert full.tree.node_count > 1


def test_tree_rejects_non_finite():
    X = np.array([[1.0], [np.nan]])
    with pytest.raises(NonFiniteError):
        fit_decision_tree(X, np.array([1.0, 2.0]))


def test_tree_interpolates_training_data():
    X = rng.normal(size=(40, 3))
    y = rng.normal(size=40)
    m = fit_decision_tree(X, y)
    assert np.allclose(m.predict(X).ravel(), y, atol=1e-12)


def test_forest_degenerate_equals_tree():
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    forest = fit_random_forest(X, y, n_estimators=1, max_features=1.0, bootstrap=False)
    tree = fit_decision_tree(X, y)
    assert np.allclose(forest.predict(X), tree.predict(X))


def test_forest_seeded_and_order_free():
    X = rng.normal(size=(40, 5))
    y = X @ rng.normal(size=5)
    a = fit_random_forest(X, y, n_estimators=20, max_features=0.5, seed=3)
    b = fit_random_forest(X, y, n_estimators=20, max_features=0.5, seed=3)
    assert np.array_equal(a.predict(X), b.predict(X))
    c = fit_random_forest(X, y, n_estimators=20, max_features=0.5, seed=4)
    assert not np.array_equal(a.predict(X), c.predict(X))


def test_forest_averages_toward_signal():
    X = rng.normal(size=(120, 4))
    y = X @ np.array([2.0, -1.0, 0.0, 0.5]) + 0.1 * rng.normal(size=120)
    m = fit_random_forest(X, y, n_estimators=100, min_samples_leaf=2, seed=0)
    pred = m.predict(X).ravel()
    r = y - pred
    assert 1 - float(r @ r) / float(((y - y.mean()) ** 2).sum()) > 0.8


def test_gbt_single_stump_exact():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([1.0, 1.0, 5.0, 5.0])
    m = fit_gbt(X, y, n_estimators=1, max_depth=1, reg_lambda=0.0, reg_alpha=0.0, learning_rate=1.0)
    assert np.allclose(m.predict(X).ravel(), y)


def test_gbt_huge_alpha_kills_all_leaves():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([1.0, 1.0, 5.0, 5.0])
    m = fit_gbt(X, y, n_estimators=3, max_depth=2, reg_alpha=1e9)
    assert np.allclose(m.predict(X).ravel(), y.mean())


def test_gbt_training_loss_monotone():
    X = rng.normal(size=(60, 5))
    y = X @ rng.normal(size=5) + 0.1 * rng.normal(size=60)
    m = fit_gbt(X, y, n_estimators=30, max_depth=3, reg_lambda=1.0, reg_alpha=0.1)
    cur = np.tile(m.base_score, (60, 1)).ravel()
    prev = np.inf
    for t in m.trees:
        cur = cur + m.learning_rate * t.predict(X, 1).ravel()
        loss = float(((cur - y) ** 2).mean())
        assert loss <= prev + 1e-12
        prev = loss


def test_gbt_multitask_masked_cells():
    X = rng.normal(size=(50, 3))
    Y = np.column_stack([X @ np.array([1.0, 0.0, -1.0]), X @ np.array([0.5, 2.0, 0.0])])
    Ym = Y.copy()
    Ym[::5, 0] = np.nan
    m = fit_gbt(X, Ym, n_estimators=40, max_depth=3, learning_rate=0.3)
    pred = m.predict(X)
    assert pred.shape == (50, 2)
    obs = ~np.isnan(Ym[:, 0])
    r = Y[obs, 0] - pred[obs, 0]
    assert float(r @ r) / float(((Y[obs, 0] - Y[obs, 0].mean()) ** 2).sum()) < 0.2


def test_gbt_subsample_deterministic():
    X = rng.normal(size=(40, 3))
    y = rng.normal(size=40)
    a = fit_gbt(X, y, n_estimators=10, max_depth=2, subsample=0.6, seed=5)
    b = fit_gbt(X, y, n_estimators=10, max_depth=2, subsample=0.6, seed=5)
    assert np.array_equal(a.predict(X), b.predict(X))
