"""Epsilon-insensitive support vector regression via SMO on the dual."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import NonFiniteError
from .base import RegressorSpec, TrainedModel, _array

KKT_TOL = 1e-3
_TAU = 1e-12

KERNELS = ("linear", "rbf", "sigmoid", "poly")


def _kernel_matrix(A, B, kernel: str, gamma: float, degree: int):
    if kernel == "linear":
        return A @ B.T
    dot = A @ B.T
    if kernel == "rbf":
        sq = (
            (A**2).sum(axis=1)[:, None]
            + (B**2).sum(axis=1)[None, :]
            - 2.0 * dot
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-gamma * sq)
    if kernel == "sigmoid":
        return np.tanh(gamma * dot)
    if kernel == "poly":
        return (gamma * dot) ** degree
    raise ValueError(f"unknown kernel {kernel!r}")


def resolve_gamma(gamma, X) -> float:
    """'scale' -> 1/(d*Var(X)), 'auto' -> 1/d, numbers pass through."""
    d = X.shape[1]
    if gamma == "scale":
        var = float(X.var())
        return 1.0 / (d * var) if var > 0 else 1.0
    if gamma == "auto":
        return 1.0 / d
    return float(gamma)


class SvrModel(TrainedModel):
    def __init__(
        self,
        spec,
        support_vectors,
        dual_coef,
        bias: float,
        kernel: str,
        gamma: float,
        degree: int,
        n_features: int,
        converged: bool = True,
    ):
        super().__init__(spec, n_features, 1)
        self.support_vectors = np.asarray(support_vectors, dtype=float).reshape(
            -1, n_features
        )
        self.dual_coef = np.asarray(dual_coef, dtype=float).ravel()
        self.bias = float(bias)
        self.kernel = kernel
        self.gamma = float(gamma)
        self.degree = int(degree)
        self.converged = bool(converged)

    def _predict(self, X):
        if self.support_vectors.shape[0] == 0:
            out = np.full(X.shape[0], self.bias)
        else:
            K = _kernel_matrix(X, self.support_vectors, self.kernel, self.gamma, self.degree)
            out = K @ self.dual_coef + self.bias
        return out[:, None]

    def effective_parameters(self) -> int:
        return self.support_vectors.shape[0] + 1

    def params_to_jsonable(self):
        return {
            "support_vectors": _array(self.support_vectors),
            "dual_coef": _array(self.dual_coef),
            "bias": self.bias,
            "kernel": self.kernel,
            "gamma": self.gamma,
            "degree": self.degree,
            "n_features": self.n_features,
            "converged": self.converged,
        }

    @classmethod
    def params_from_jsonable(cls, spec, payload):
        return cls(
            spec,
            np.array(payload["support_vectors"], dtype=float),
            np.array(payload["dual_coef"], dtype=float),
            payload["bias"],
            payload["kernel"],
            payload["gamma"],
            payload["degree"],
            payload["n_features"],
            payload.get("converged", True),
        )


def fit_svr(
    X,
    y,
    kernel: str = "rbf",
    C: float = 1.0,
    epsilon: float = 0.1,
    gamma="scale",
    degree: int = 3,
    seed: int = 0,
) -> SvrModel:
    """Maximal-violating-pair SMO on the stacked dual.

    Variables are z = [alpha; alpha*] with labels [+1; -1]; the pair with
    the largest KKT violation is updated each step until the gap drops
    below 1e-3. Hitting the 100*n iteration cap returns the current
    iterate flagged converged=False.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteError("svr: non-finite values in input")
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    n, d = X.shape
    spec = RegressorSpec(
        "SVR",
        {
            "kernel": kernel,
            "C": float(C),
            "epsilon": float(epsilon),
            "gamma": gamma if isinstance(gamma, str) else float(gamma),
            "degree": int(degree),
        },
        seed,
    )
    g = resolve_gamma(gamma, X)
    K = _kernel_matrix(X, X, kernel, g, degree)

    labels = np.concatenate([np.ones(n), -np.ones(n)])
    z = np.zeros(2 * n)
    G = np.concatenate([epsilon - y, epsilon + y])
    # diagonal of the stacked Q matrix: Q_tt = K_tt on both halves
    Kdiag = np.concatenate([np.diag(K), np.diag(K)])

    max_iter = 100 * n
    converged = False
    for _ in range(max_iter):
        score = -labels * G
        in_up = np.where(labels > 0, z < C, z > 0)
        in_low = np.where(labels > 0, z > 0, z < C)
        up_scores = np.where(in_up, score, -np.inf)
        low_scores = np.where(in_low, score, np.inf)
        i = int(np.argmax(up_scores))
        j = int(np.argmin(low_scores))
        m = up_scores[i]
        M = low_scores[j]
        if m - M <= KKT_TOL:
            converged = True
            break
        # block signs of Q's columns cancel against the labels, leaving
        # raw kernel columns in both the step and the gradient update
        ki = K[:, i % n]
        kj = K[:, j % n]
        a = Kdiag[i] + Kdiag[j] - 2.0 * K[i % n, j % n]
        if a <= 0:
            a = _TAU
        step = (m - M) / a
        ub_i = C - z[i] if labels[i] > 0 else z[i]
        ub_j = z[j] if labels[j] > 0 else C - z[j]
        step = min(step, ub_i, ub_j)
        z[i] += labels[i] * step
        z[j] -= labels[j] * step
        diff = step * (ki - kj)
        G[:n] += diff
        G[n:] -= diff
    if not converged:
        warnings.warn(
            "svr: SMO hit the iteration cap before reaching the KKT tolerance",
            RuntimeWarning,
            stacklevel=2,
        )

    score = -labels * G
    in_up = np.where(labels > 0, z < C, z > 0)
    in_low = np.where(labels > 0, z > 0, z < C)
    m = np.where(in_up, score, -np.inf).max()
    M = np.where(in_low, score, np.inf).min()
    bias = (m + M) / 2.0

    beta = z[:n] - z[n:]
    sv = np.abs(beta) > 0
    model = SvrModel(
        spec,
        X[sv],
        beta[sv],
        bias,
        kernel,
        g,
        degree,
        d,
        converged,
    )
    if not np.isfinite(bias):
        raise NonFiniteError("svr diverged")
    return model
