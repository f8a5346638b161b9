"""CART regression trees with variance-reduction splitting."""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError
from .base import RegressorSpec, TrainedModel

MIN_GAIN = 1e-15


class Tree:
    """Flat-array tree. feature = -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.value) - 1

    @property
    def node_count(self) -> int:
        return len(self.value)

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
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
            "value": [float(v) for v in self.value],
        }

    @classmethod
    def from_jsonable(cls, payload: dict) -> "Tree":
        tree = cls()
        tree.feature = [int(v) for v in payload["feature"]]
        tree.threshold = [float(v) for v in payload["threshold"]]
        tree.left = [int(v) for v in payload["left"]]
        tree.right = [int(v) for v in payload["right"]]
        tree.value = [float(v) for v in payload["value"]]
        return tree


def best_split(x: np.ndarray, y: np.ndarray, min_samples_leaf: int):
    """Best (gain, threshold) for one feature, or None.

    Gain is the drop in total squared error, scanned at midpoints between
    distinct sorted values with prefix sums. The first position wins ties.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    n = xs.size
    cy = np.cumsum(ys)
    cy2 = np.cumsum(ys**2)
    total, total2 = cy[-1], cy2[-1]
    parent_ss = total2 - total * total / n

    left_n = np.arange(1, n)
    right_n = n - left_n
    valid = (xs[:-1] != xs[1:]) & (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
    if not valid.any():
        return None
    sum_l = cy[:-1]
    ss_l = cy2[:-1] - sum_l**2 / left_n
    sum_r = total - sum_l
    ss_r = (total2 - cy2[:-1]) - sum_r**2 / right_n
    gain = np.where(valid, parent_ss - ss_l - ss_r, -np.inf)
    pos = int(np.argmax(gain))
    if gain[pos] <= MIN_GAIN:
        return None
    return float(gain[pos]), float((xs[pos] + xs[pos + 1]) / 2.0)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    min_samples_leaf: int,
    min_samples_split: int,
    feature_chooser=None,
) -> Tree:
    """Depth-first CART growth.

    feature_chooser(d) -> candidate feature indices for one split; None
    scans every feature. Candidates are tried in index order so equal
    gains resolve to the lowest feature index.
    """
    d = X.shape[1]
    tree = Tree()

    def build(rows: np.ndarray) -> int:
        node = tree._new_node(float(y[rows].mean()))
        if rows.size < min_samples_split:
            return node
        if feature_chooser is None:
            candidates = range(d)
        else:
            candidates = feature_chooser(d)
        best = None
        for j in candidates:
            found = best_split(X[rows, j], y[rows], min_samples_leaf)
            if found is not None and (best is None or found[0] > best[0]):
                best = (found[0], j, found[1])
        if best is None:
            return node
        _, feat, thr = best
        go_left = X[rows, feat] <= thr
        left = build(rows[go_left])
        right = build(rows[~go_left])
        tree.feature[node] = feat
        tree.threshold[node] = thr
        tree.left[node] = left
        tree.right[node] = right
        return node

    build(np.arange(X.shape[0]))
    return tree


class DecisionTreeModel(TrainedModel):
    def __init__(self, spec, tree: Tree, n_features: int):
        super().__init__(spec, n_features, 1)
        self.tree = tree

    def _predict(self, X):
        return self.tree.predict(X)[:, None]

    def effective_parameters(self) -> int:
        return self.tree.node_count

    def params_to_jsonable(self):
        return {"tree": self.tree.to_jsonable(), "n_features": self.n_features}

    @classmethod
    def params_from_jsonable(cls, spec, payload):
        return cls(spec, Tree.from_jsonable(payload["tree"]), payload["n_features"])


def fit_decision_tree(
    X, y, min_samples_leaf: int = 1, min_samples_split: int = 2, seed: int = 0
) -> DecisionTreeModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteError("decision tree: non-finite values in input")
    spec = RegressorSpec(
        "DTR",
        {
            "min_samples_leaf": int(min_samples_leaf),
            "min_samples_split": int(min_samples_split),
        },
        seed,
    )
    tree = grow_tree(X, y, int(min_samples_leaf), int(min_samples_split))
    return DecisionTreeModel(spec, tree, X.shape[1])
