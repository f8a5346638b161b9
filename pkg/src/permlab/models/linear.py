"""Penalized linear regressors: elastic net, its multitask variant, and
an evidence-approximation Bayesian ridge."""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError
from .base import RegressorSpec, TrainedModel, _array

MAX_SWEEPS = 10000
COORD_TOL = 1e-6
BAYES_TOL = 1e-3
BAYES_MAX_ITER = 300


class LinearModel(TrainedModel):
    """Coefficient matrix (d, T) plus per-task intercepts."""

    def __init__(self, spec, coef, intercept, converged=True):
        coef = np.asarray(coef, dtype=float)
        if coef.ndim == 1:
            coef = coef[:, None]
        intercept = np.atleast_1d(np.asarray(intercept, dtype=float))
        super().__init__(spec, coef.shape[0], coef.shape[1])
        self.coef = coef
        self.intercept = intercept
        self.converged = converged

    def _predict(self, X):
        return X @ self.coef + self.intercept

    def effective_parameters(self) -> int:
        return int(np.count_nonzero(self.coef)) + self.coef.shape[1]

    def params_to_jsonable(self):
        return {
            "coef": _array(self.coef),
            "intercept": _array(self.intercept),
            "converged": bool(self.converged),
        }

    @classmethod
    def params_from_jsonable(cls, spec, payload):
        return cls(
            spec,
            np.array(payload["coef"]),
            np.array(payload["intercept"]),
            payload.get("converged", True),
        )


def _soft(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def _check_finite(name, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"{name}: non-finite values in input")


def fit_elastic_net(
    X, y, alpha: float, l1_ratio: float, seed: int = 0
) -> LinearModel:
    """Cyclic coordinate descent for
    (1/2n)||y - Xw - b||^2 + alpha*rho*||w||_1 + (alpha*(1-rho)/2)*||w||^2.

    The intercept is unpenalized (handled by centering). alpha = 0 falls
    back to a direct least-squares solve, where coordinate descent has no
    penalty left to stabilize it.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    _check_finite("elastic net", X, y)
    spec = RegressorSpec(
        "EN", {"alpha": float(alpha), "l1_ratio": float(l1_ratio)}, seed
    )
    n, d = X.shape
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean

    if alpha == 0:
        w, *_ = np.linalg.lstsq(Xc, yc, rcond=None)
    else:
        lam1 = alpha * l1_ratio
        lam2 = alpha * (1.0 - l1_ratio)
        col_sq = (Xc**2).sum(axis=0) / n
        w = np.zeros(d)
        r = yc.copy()
        for _ in range(MAX_SWEEPS):
            max_delta = 0.0
            for j in range(d):
                if col_sq[j] <= 0.0:
                    continue
                rho_j = Xc[:, j] @ r / n + col_sq[j] * w[j]
                w_new = _soft(rho_j, lam1) / (col_sq[j] + lam2)
                delta = w_new - w[j]
                if delta != 0.0:
                    r -= Xc[:, j] * delta
                    w[j] = w_new
                    ad = abs(delta)
                    if ad > max_delta:
                        max_delta = ad
            if max_delta < COORD_TOL:
                break
        if not np.all(np.isfinite(w)):
            raise NonFiniteError("elastic net diverged")
    b = y_mean - x_mean @ w
    return LinearModel(spec, w, [b])


def fit_multitask_elastic_net(
    X, Y, alpha: float, l1_ratio: float, seed: int = 0
) -> LinearModel:
    """Block coordinate descent with a row-wise group penalty.

    Objective: (1/2n) * sum over observed cells of squared residual
    + alpha*rho * sum_j ||W_j.||_2 + (alpha*(1-rho)/2)*||W||_F^2.
    NaN cells of Y are masked out of the loss, so a feature row is
    selected for all tasks or none. Each block update is a proximal step
    with the exact per-row curvature bound max_t h_jt, which reduces to
    the single-task closed form when no cell is missing.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    _check_finite("multitask elastic net", X)
    n, d = X.shape
    T = Y.shape[1]
    spec = RegressorSpec(
        "MTEN", {"alpha": float(alpha), "l1_ratio": float(l1_ratio)}, seed
    )
    M = ~np.isnan(Y)
    Yf = np.where(M, Y, 0.0)
    task_counts = M.sum(axis=0)

    if alpha == 0:
        coef = np.zeros((d, T))
        intercept = np.zeros(T)
        for t in range(T):
            rows = M[:, t]
            if not rows.any():
                continue
            Xt = X[rows]
            yt = Yf[rows, t]
            xm = Xt.mean(axis=0)
            ym = yt.mean()
            w, *_ = np.linalg.lstsq(Xt - xm, yt - ym, rcond=None)
            coef[:, t] = w
            intercept[t] = ym - xm @ w
        return LinearModel(spec, coef, intercept)

    lam1 = alpha * l1_ratio
    lam2 = alpha * (1.0 - l1_ratio)
    # per-(feature, task) curvature of the masked quadratic loss
    H = (X**2).T @ M / n
    L = H.max(axis=1) + lam2

    W = np.zeros((d, T))
    b = np.where(task_counts > 0, Yf.sum(axis=0) / np.maximum(task_counts, 1), 0.0)
    R = np.where(M, Yf - b, 0.0)
    for _ in range(MAX_SWEEPS):
        max_delta = 0.0
        # unpenalized intercepts: masked residual means
        shift = np.where(
            task_counts > 0, R.sum(axis=0) / np.maximum(task_counts, 1), 0.0
        )
        if np.any(shift != 0.0):
            b = b + shift
            R = R - M * shift
            max_delta = float(np.abs(shift).max())
        for j in range(d):
            if L[j] <= 0.0:
                continue
            row = W[j]
            grad = -(X[:, j] @ R) / n + lam2 * row
            U = row - grad / L[j]
            norm = float(np.sqrt(U @ U))
            if norm <= lam1 / L[j]:
                new_row = np.zeros(T)
            else:
                new_row = (1.0 - lam1 / (L[j] * norm)) * U
            delta = new_row - row
            ad = float(np.abs(delta).max())
            if ad > 0.0:
                R -= M * np.outer(X[:, j], delta)
                W[j] = new_row
                if ad > max_delta:
                    max_delta = ad
        if max_delta < COORD_TOL:
            break
    if not np.all(np.isfinite(W)):
        raise NonFiniteError("multitask elastic net diverged")
    return LinearModel(spec, W, b)


def fit_bayesian_ridge(X, y, seed: int = 0) -> LinearModel:
    """Evidence approximation: iterate noise and weight precisions.

    MacKay-style updates with vague Gamma hyperpriors (1e-6) until both
    precisions move by less than 1e-3 relative, then report the posterior
    mean coefficients.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    _check_finite("bayesian ridge", X, y)
    spec = RegressorSpec("BayesRidge", {}, seed)
    n, d = X.shape
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean
    ss_y = float(yc @ yc)
    if ss_y == 0.0:
        return LinearModel(spec, np.zeros(d), [y_mean])

    hyper = 1e-6
    U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    eigen = s**2
    uty = U.T @ yc
    noise = n / ss_y  # 1 / Var(y) start
    weight_prec = 1.0
    coef = np.zeros(d)
    for _ in range(BAYES_MAX_ITER):
        shrink = s / (weight_prec / noise + eigen)
        coef = Vt.T @ (shrink * uty)
        gamma = float(np.sum(noise * eigen / (weight_prec + noise * eigen)))
        rss = float(np.sum((yc - Xc @ coef) ** 2))
        mm = float(coef @ coef)
        new_weight = (gamma + 2 * hyper) / (mm + 2 * hyper)
        new_noise = (n - gamma + 2 * hyper) / (rss + 2 * hyper)
        if (
            abs(new_weight - weight_prec) < BAYES_TOL * abs(weight_prec)
            and abs(new_noise - noise) < BAYES_TOL * abs(noise)
        ):
            weight_prec, noise = new_weight, new_noise
            break
        weight_prec, noise = new_weight, new_noise
    shrink = s / (weight_prec / noise + eigen)
    coef = Vt.T @ (shrink * uty)
    if not np.all(np.isfinite(coef)):
        raise NonFiniteError("bayesian ridge diverged")
    b = y_mean - x_mean @ coef
    return LinearModel(spec, coef, [b])
