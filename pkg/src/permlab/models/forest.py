"""Random forest: bagged CART trees with per-split feature subsampling."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteError
from .base import RegressorSpec, TrainedModel
from .tree import Tree, grow_tree


class RandomForestModel(TrainedModel):
    def __init__(self, spec, trees: list, n_features: int):
        super().__init__(spec, n_features, 1)
        self.trees = trees

    def _predict(self, X):
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict(X)
        return (acc / len(self.trees))[:, None]

    def effective_parameters(self) -> int:
        return sum(tree.node_count for tree in self.trees)

    def params_to_jsonable(self):
        return {
            "trees": [tree.to_jsonable() for tree in self.trees],
            "n_features": self.n_features,
        }

    @classmethod
    def params_from_jsonable(cls, spec, payload):
        trees = [Tree.from_jsonable(t) for t in payload["trees"]]
        return cls(spec, trees, payload["n_features"])


def fit_random_forest(
    X,
    y,
    n_estimators: int = 1000,
    min_samples_leaf: int = 1,
    min_samples_split: int = 2,
    max_features: float = 1.0,
    seed: int = 0,
    bootstrap: bool = True,
) -> RandomForestModel:
    """Mean of bootstrap-sampled trees.

    Each tree draws its own rows (n with replacement) and, at every split,
    ceil(max_features * d) candidate features without replacement. Tree
    randomness comes from seeds spawned off the model seed, so the fit is
    reproducible regardless of build order. bootstrap=False is a test
    hook that feeds every tree the full sample.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteError("random forest: non-finite values in input")
    n, d = X.shape
    spec = RegressorSpec(
        "RFR",
        {
            "n_estimators": int(n_estimators),
            "min_samples_leaf": int(min_samples_leaf),
            "min_samples_split": int(min_samples_split),
            "max_features": float(max_features),
        },
        seed,
    )
    k = max(1, math.ceil(float(max_features) * d))
    children = np.random.SeedSequence(seed).spawn(n_estimators)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        if bootstrap:
            rows = rng.integers(0, n, n)
        else:
            rows = np.arange(n)
        if k >= d:
            chooser = None
        else:
            def chooser(_d, rng=rng):
                return np.sort(rng.choice(_d, size=k, replace=False))
        trees.append(
            grow_tree(X[rows], y[rows], int(min_samples_leaf), int(min_samples_split), chooser)
        )
    return RandomForestModel(spec, trees, d)
