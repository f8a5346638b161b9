"""Partial least squares (PLS2) fitted by NIPALS deflation."""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError, RankDeficientError
from .base import RegressorSpec, TrainedModel, _array

_COLLAPSE = 1e-12
_INNER_TOL = 1e-10
_INNER_MAX = 500


class PlsModel(TrainedModel):
    def __init__(self, spec, coef, intercept, weights, x_loadings, y_loadings):
        coef = np.asarray(coef, dtype=float)
        intercept = np.atleast_1d(np.asarray(intercept, dtype=float))
        super().__init__(spec, coef.shape[0], coef.shape[1])
        self.coef = coef
        self.intercept = intercept
        self.weights = np.asarray(weights, dtype=float)
        self.x_loadings = np.asarray(x_loadings, dtype=float)
        self.y_loadings = np.asarray(y_loadings, dtype=float)

    @property
    def components_used(self) -> int:
        return self.weights.shape[1]

    def _predict(self, X):
        return X @ self.coef + self.intercept

    def effective_parameters(self) -> int:
        k = self.components_used
        return k * (self.n_features + self.n_tasks)

    def params_to_jsonable(self):
        return {
            "coef": _array(self.coef),
            "intercept": _array(self.intercept),
            "weights": _array(self.weights),
            "x_loadings": _array(self.x_loadings),
            "y_loadings": _array(self.y_loadings),
        }

    @classmethod
    def params_from_jsonable(cls, spec, payload):
        return cls(
            spec,
            np.array(payload["coef"]),
            np.array(payload["intercept"]),
            np.array(payload["weights"]),
            np.array(payload["x_loadings"]),
            np.array(payload["y_loadings"]),
        )


def fit_pls(X, Y, n_components: int, seed: int = 0) -> PlsModel:
    """NIPALS with deflation of both blocks.

    Missing Y cells are centered over the observed entries and zero-filled,
    so they contribute nothing to the covariance directions. Extraction
    stops early once the Y residual is exhausted (constant Y gives zero
    coefficients); a collapsed X direction with Y signal left to explain
    raises RankDeficientError.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("pls: non-finite values in X")
    n, d = X.shape
    T = Y.shape[1]
    spec = RegressorSpec("PLS", {"n_components": int(n_components)}, seed)

    mask = ~np.isnan(Y)
    counts = mask.sum(axis=0)
    y_mean = np.where(counts > 0, np.where(mask, Y, 0.0).sum(axis=0) / np.maximum(counts, 1), 0.0)
    x_mean = X.mean(axis=0)
    Xr = X - x_mean
    Yr = np.where(mask, Y - y_mean, 0.0)

    W = np.zeros((d, 0))
    P = np.zeros((d, 0))
    Q = np.zeros((T, 0))
    w_cols, p_cols, q_cols = [], [], []
    for _ in range(n_components):
        col_ss = (Yr**2).sum(axis=0)
        if col_ss.max() < _COLLAPSE:
            break
        u = Yr[:, int(np.argmax(col_ss))].copy()
        t = np.zeros(n)
        w = np.zeros(d)
        for _ in range(_INNER_MAX):
            w = Xr.T @ u
            nw = float(np.sqrt(w @ w))
            if nw < _COLLAPSE:
                raise RankDeficientError(
                    "pls: latent direction collapsed with target signal remaining"
                )
            w /= nw
            t_new = Xr @ w
            tt = float(t_new @ t_new)
            if tt < _COLLAPSE:
                raise RankDeficientError(
                    "pls: latent direction collapsed with target signal remaining"
                )
            q = Yr.T @ t_new / tt
            if float(np.abs(t_new - t).max()) <= _INNER_TOL * max(1.0, float(np.abs(t_new).max())):
                t = t_new
                break
            t = t_new
            qq = float(q @ q)
            if qq < _COLLAPSE:
                break
            u = Yr @ q / qq
        tt = float(t @ t)
        p = Xr.T @ t / tt
        q = Yr.T @ t / tt
        Xr = Xr - np.outer(t, p)
        Yr = Yr - np.outer(t, q)
        w_cols.append(w)
        p_cols.append(p)
        q_cols.append(q)

    if w_cols:
        W = np.column_stack(w_cols)
        P = np.column_stack(p_cols)
        Q = np.column_stack(q_cols)
        # B = W (P^T W)^-1 Q^T, the usual regression-coefficient identity
        coef = W @ np.linalg.solve(P.T @ W, Q.T)
    else:
        coef = np.zeros((d, T))
    if not np.all(np.isfinite(coef)):
        raise NonFiniteError("pls diverged")
    intercept = y_mean - x_mean @ coef
    return PlsModel(spec, coef, intercept, W, P, Q)
