"""Experimental-design helpers: forward feature selection and greedy
D-optimal row selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTargetError, KTooLargeError
from .models import fit_elastic_net, fit_pls

MODEL_FAMILIES = ("OLS", "lasso", "ridge", "PLS")
_EPS = 1e-8
_TIE_REL = 1e-9
_REINVERT_EVERY = 25

# small per-family tuning grids tried at every greedy step
_LASSO_ALPHAS = (0.01, 0.1, 1.0)
_RIDGE_ALPHAS = (0.01, 0.1, 1.0)
_PLS_MAX_COMPONENTS = 5


def _cv_folds(n: int, n_folds: int = 5):
    """Deterministic round-robin row folds (no shuffling, no seed)."""
    idx = np.arange(n)
    return [(idx % n_folds) == f for f in range(n_folds)]


def _family_val_r2(X, y, family: str) -> float:
    """Mean validation R^2 over round-robin folds, maximized over the
    family's small internal grid."""
    n, d = X.shape
    folds = _cv_folds(n)
    if family == "OLS":
        grids = [None]
    elif family == "lasso":
        grids = list(_LASSO_ALPHAS)
    elif family == "ridge":
        grids = list(_RIDGE_ALPHAS)
    elif family == "PLS":
        grids = list(range(1, min(d, _PLS_MAX_COMPONENTS) + 1))
    else:
        raise ValueError(f"unknown model family {family!r}")

    best = -math.inf
    for setting in grids:
        scores = []
        for val in folds:
            train = ~val
            if val.sum() < 2 or train.sum() < 2:
                continue
            Xt, yt = X[train], y[train]
            Xv, yv = X[val], y[val]
            try:
                if family == "OLS":
                    model = fit_elastic_net(Xt, yt, 0.0, 0.0)
                elif family == "lasso":
                    model = fit_elastic_net(Xt, yt, setting, 1.0)
                elif family == "ridge":
                    model = fit_elastic_net(Xt, yt, setting, 0.0)
                else:
                    model = fit_pls(Xt, yt, setting)
                pred = model.predict(Xv)[:, 0]
                ss_tot = float(((yv - yv.mean()) ** 2).sum())
                if ss_tot == 0.0:
                    continue
                scores.append(1.0 - float(((yv - pred) ** 2).sum()) / ss_tot)
            except Exception:
                continue
        if scores:
            mean = float(np.mean(scores))
            if mean > best:
                best = mean
    return best


def forward_feature_select(X, y, model_family: str, k: int) -> list:
    """Greedy forward selection by cross-validated R^2.

    At each step the feature whose addition gives the highest validation
    R^2 joins the selected set; exact score ties resolve to the lowest
    feature index.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if k > d:
        raise KTooLargeError(f"cannot select {k} of {d} features")
    if model_family not in MODEL_FAMILIES:
        raise ValueError(f"model family must be one of {MODEL_FAMILIES}")
    if float(np.ptp(y)) == 0.0:
        raise DegenerateTargetError("target is constant")

    selected: list = []
    remaining = list(range(d))
    for _ in range(k):
        best_score = -math.inf
        best_feature = None
        for j in remaining:
            cols = selected + [j]
            score = _family_val_r2(X[:, cols], y, model_family)
            if score > best_score:
                best_score = score
                best_feature = j
        selected.append(best_feature)
        remaining.remove(best_feature)
    return selected


@dataclass
class CandidatePool:
    """Standardized candidate rows plus indices already owned."""

    matrix: np.ndarray
    owned: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[1] < 1:
            raise ValueError("candidate matrix must be 2-D with at least 1 column")
        if np.isnan(self.matrix).any():
            raise ValueError("candidate matrix must have no missing cells")
        self.owned = tuple(int(i) for i in self.owned)
        n = self.matrix.shape[0]
        for i in self.owned:
            if not (0 <= i < n):
                raise ValueError(f"owned index {i} out of range")


def gram_log_det(X_rows: np.ndarray, eps: float = _EPS) -> float:
    d = X_rows.shape[1]
    M = X_rows.T @ X_rows + eps * np.eye(d)
    sign, value = np.linalg.slogdet(M)
    return float(value) if sign > 0 else -math.inf


def d_optimal_select(pool: CandidatePool, k: int, seed: int = 0) -> list:
    """Greedy log-det augmentation of the regularized Gram matrix.

    Each step adds the candidate maximizing det(M + x x^T) =
    det(M) * (1 + x^T M^-1 x), tracked with Sherman-Morrison updates and
    periodic exact re-inversions. Gains within 1e-9 relative of the best
    form a tie group resolved by the seeded generator.
    """
    X = pool.matrix
    n, d = X.shape
    owned = set(pool.owned)
    available = [i for i in range(n) if i not in owned]
    if k > len(available):
        raise KTooLargeError(f"cannot pick {k} of {len(available)} candidates")

    M = _EPS * np.eye(d)
    for i in owned:
        M += np.outer(X[i], X[i])
    Minv = np.linalg.inv(M)
    rng = np.random.default_rng(seed)

    chosen: list = []
    for step in range(k):
        cand = np.array(available)
        V = X[cand]
        # x^T M^-1 x for every candidate at once
        quad = np.einsum("ij,jk,ik->i", V, Minv, V)
        gains = 1.0 + quad
        best = float(gains.max())
        tol = _TIE_REL * max(1.0, abs(best))
        group = np.flatnonzero(gains >= best - tol)
        if group.size > 1:
            pick_pos = int(group[rng.integers(group.size)])
        else:
            pick_pos = int(group[0])
        pick = int(cand[pick_pos])
        x = X[pick]
        Mx = Minv @ x
        denom = 1.0 + float(x @ Mx)
        Minv = Minv - np.outer(Mx, Mx) / denom
        M = M + np.outer(x, x)
        if (step + 1) % _REINVERT_EVERY == 0:
            Minv = np.linalg.inv(M)
        chosen.append(pick)
        available.remove(pick)
    return chosen
