"""Second-order gradient-boosted trees for squared loss, single- or
multi-target with shared splits and vector leaves."""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError
from .base import RegressorSpec, TrainedModel, _array

DEFAULT_LEARNING_RATE = 0.3
_GAIN_EPS = 1e-12


class GbtTree:
    """Flat tree whose leaves hold one value per task."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []

    def _new_node(self, value: np.ndarray) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.value) - 1

    @property
    def node_count(self) -> int:
        return len(self.value)

    def predict(self, X: np.ndarray, n_tasks: int) -> np.ndarray:
        out = np.zeros((X.shape[0], n_tasks))
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            feat = self.feature[node]
            if feat < 0:
                out[rows] = self.value[node]
                continue
            go_left = X[rows, feat] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out

    def to_jsonable(self) -> dict:
        return {
            "feature": list(self.feature),
            "threshold": [float(t) for t in self.threshold],
            "left": list(self.left),
            "right": list(self.right),
            "value": [_array(v) for v in self.value],
        }

    @classmethod
    def from_jsonable(cls, payload: dict) -> "GbtTree":
        tree = cls()
        tree.feature = [int(v) for v in payload["feature"]]
        tree.threshold = [float(v) for v in payload["threshold"]]
        tree.left = [int(v) for v in payload["left"]]
        tree.right = [int(v) for v in payload["right"]]
        tree.value = [np.asarray(v, dtype=float) for v in payload["value"]]
        return tree


def _leaf_weight(G: np.ndarray, H: np.ndarray, lam: float, alpha: float) -> np.ndarray:
    denom = H + lam
    mag = np.maximum(np.abs(G) - alpha, 0.0)
    out = np.zeros_like(G)
    ok = denom > 0
    out[ok] = -np.sign(G[ok]) * mag[ok] / denom[ok]
    return out


def _half_score(G: np.ndarray, H: np.ndarray, lam: float) -> float:
    denom = H + lam
    ok = denom > 0
    return 0.5 * float((G[ok] ** 2 / denom[ok]).sum())


class GbtModel(TrainedModel):
    def __init__(self, spec, base_score, learning_rate, trees, n_features: int):
        base_score = np.atleast_1d(np.asarray(base_score, dtype=float))
        super().__init__(spec, n_features, base_score.shape[0])
        self.base_score = base_score
        self.learning_rate = float(learning_rate)
        self.trees = trees

    def _predict(self, X):
        out = np.tile(self.base_score, (X.shape[0], 1))
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X, self.n_tasks)
        return out

    def effective_parameters(self) -> int:
        return sum(tree.node_count for tree in self.trees)

    def params_to_jsonable(self):
        return {
            "base_score": _array(self.base_score),
            "learning_rate": self.learning_rate,
            "trees": [tree.to_jsonable() for tree in self.trees],
            "n_features": self.n_features,
        }

    @classmethod
    def params_from_jsonable(cls, spec, payload):
        trees = [GbtTree.from_jsonable(t) for t in payload["trees"]]
        return cls(
            spec,
            np.array(payload["base_score"]),
            payload["learning_rate"],
            trees,
            payload["n_features"],
        )


def _grow_gbt_tree(X, G, H, max_depth: int, lam: float, alpha: float) -> GbtTree:
    tree = GbtTree()

    def build(rows: np.ndarray, depth: int) -> int:
        Gs = G[rows].sum(axis=0)
        Hs = H[rows].sum(axis=0)
        node = tree._new_node(_leaf_weight(Gs, Hs, lam, alpha))
        if depth >= max_depth or rows.size < 2:
            return node
        parent = _half_score(Gs, Hs, lam)
        best = None
        for j in range(X.shape[1]):
            order = np.argsort(X[rows, j], kind="stable")
            xs = X[rows[order], j]
            if xs[0] == xs[-1]:
                continue
            cG = np.cumsum(G[rows[order]], axis=0)
            cH = np.cumsum(H[rows[order]], axis=0)
            GL, HL = cG[:-1], cH[:-1]
            GR, HR = Gs - GL, Hs - HL
            with np.errstate(divide="ignore", invalid="ignore"):
                left = np.where(HL + lam > 0, GL**2 / (HL + lam), 0.0)
                right = np.where(HR + lam > 0, GR**2 / (HR + lam), 0.0)
            gain = 0.5 * (left.sum(axis=1) + right.sum(axis=1)) - parent
            gain[xs[:-1] == xs[1:]] = -np.inf
            pos = int(np.argmax(gain))
            if gain[pos] > _GAIN_EPS and (best is None or gain[pos] > best[0]):
                best = (float(gain[pos]), j, float((xs[pos] + xs[pos + 1]) / 2.0))
        if best is None:
            return node
        _, feat, thr = best
        go_left = X[rows, feat] <= thr
        left = build(rows[go_left], depth + 1)
        right = build(rows[~go_left], depth + 1)
        tree.feature[node] = feat
        tree.threshold[node] = thr
        tree.left[node] = left
        tree.right[node] = right
        return node

    build(np.arange(X.shape[0]), 0)
    return tree


def fit_gbt(
    X,
    Y,
    n_estimators: int = 100,
    max_depth: int = 6,
    reg_lambda: float = 1.0,
    reg_alpha: float = 0.0,
    subsample: float = 1.0,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    seed: int = 0,
) -> GbtModel:
    """Boosting on the squared loss: g = residual, h = 1 per observed cell.

    Splits maximize the summed second-order gain over tasks; leaf weights
    apply the L1 soft threshold. Row subsampling redraws from a fresh
    per-iteration seed; the grown tree still updates predictions on every
    row. Missing target cells carry zero gradient and hessian.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("gbt: non-finite values in X")
    n, d = X.shape
    T = Y.shape[1]
    spec = RegressorSpec(
        "GBT",
        {
            "n_estimators": int(n_estimators),
            "max_depth": int(max_depth),
            "lambda": float(reg_lambda),
            "alpha": float(reg_alpha),
            "subsample": float(subsample),
            "learning_rate": float(learning_rate),
        },
        seed,
    )
    mask = ~np.isnan(Y)
    counts = np.maximum(mask.sum(axis=0), 1)
    base = np.where(mask, Y, 0.0).sum(axis=0) / counts
    pred = np.tile(base, (n, 1))

    children = np.random.SeedSequence(seed).spawn(max(n_estimators, 1))
    trees = []
    for it in range(n_estimators):
        G = np.where(mask, pred - Y, 0.0)
        H = mask.astype(float)
        if subsample < 1.0:
            rng = np.random.default_rng(children[it])
            k = max(1, int(round(subsample * n)))
            rows = np.sort(rng.choice(n, size=k, replace=False))
        else:
            rows = np.arange(n)
        tree = _grow_gbt_tree(
            X[rows], G[rows], H[rows], int(max_depth), float(reg_lambda), float(reg_alpha)
        )
        pred += learning_rate * tree.predict(X, T)
        trees.append(tree)
    if not np.all(np.isfinite(pred)):
        raise NonFiniteError("gbt diverged")
    return GbtModel(spec, base, learning_rate, trees, d)
