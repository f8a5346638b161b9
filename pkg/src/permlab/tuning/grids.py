"""Default hyperparameter grids, one list of points per model class.

Point order is the canonical grid order used for tie-breaking; keep the
nesting of the loops stable.
"""

from __future__ import annotations

_TREE_LEAF = (1, 2, 4, 8, 16, 32, 64)
_TREE_SPLIT = (2, 4, 8, 16, 32, 64)
_EN_ALPHA = (0, 0.01, 0.05, 0.1, 0.5, 1, 5, 10, 50, 100, 500, 1000)
_EN_L1 = tuple(round(0.1 * i, 1) for i in range(11))
_SVR_KERNELS = (
    ("linear", None),
    ("rbf", None),
    ("sigmoid", None),
    ("poly", 1),
    ("poly", 2),
    ("poly", 3),
)
_SVR_C = (0.001, 0.01, 0.1, 1, 10)
_SVR_EPS = (0.0001, 0.001, 0.01, 0.1, 1, 10, 100)
_GBT_REG = (0.001, 0.01, 0.1, 1, 10)
_MLP_WIDTHS = (15, 20, 50, 100)
_MLP_DROPOUT = (0.5, 0.6, 0.8)
_MLP_DECAY = (0.01, 0.1)
_MLP_LR = (0.1, 0.3)


def _tree_grid():
    return [
        {"min_samples_leaf": leaf, "min_samples_split": split}
        for leaf in _TREE_LEAF
        for split in _TREE_SPLIT
    ]


def _en_grid():
    return [
        {"alpha": a, "l1_ratio": r} for a in _EN_ALPHA for r in _EN_L1
    ]


def default_grid(model_class: str) -> list:
    if model_class == "DTR":
        return _tree_grid()
    if model_class == "RFR":
        return [
            dict(point, max_features=mf)
            for point in _tree_grid()
            for mf in (0.1, 0.2, 0.4, 0.8, 1.0)
        ]
    if model_class in ("EN", "MTEN"):
        return _en_grid()
    if model_class == "BayesRidge":
        return [{}]
    if model_class == "PLS":
        return [{"n_components": k} for k in (1, 2, 5, 10, 20, 50, 100)]
    if model_class == "SVR":
        points = []
        for kernel, degree in _SVR_KERNELS:
            for gamma in ("scale", "auto"):
                for c in _SVR_C:
                    for eps in _SVR_EPS:
                        point = {
                            "kernel": kernel,
                            "gamma": gamma,
                            "C": c,
                            "epsilon": eps,
                        }
                        if degree is not None:
                            point["degree"] = degree
                        points.append(point)
        return points
    if model_class == "GBT":
        return [
            {
                "n_estimators": n,
                "max_depth": depth,
                "lambda": lam,
                "alpha": alpha,
                "subsample": sub,
            }
            for n in (100, 1000)
            for depth in (4, 5, 6)
            for lam in _GBT_REG
            for alpha in _GBT_REG
            for sub in (0.5, 1.0)
        ]
    if model_class == "MLP":
        return [
            {
                "hidden_sizes": [width] * layers,
                "dropout": drop,
                "weight_decay": decay,
                "learning_rate": lr,
            }
            for layers in (1, 2)
            for width in _MLP_WIDTHS
            for drop in _MLP_DROPOUT
            for decay in _MLP_DECAY
            for lr in _MLP_LR
        ]
    raise ValueError(f"no default grid for model class {model_class!r}")


def clip_pls_grid(grid: list, n_train_min: int, n_features: int) -> list:
    """Clip n_components to min(n-1, d) and drop duplicate clipped points,
    keeping the first occurrence (its grid position wins ties)."""
    bound = min(n_train_min - 1, n_features)
    out = []
    seen = set()
    for point in grid:
        k = min(int(point["n_components"]), bound)
        if k in seen:
            continue
        seen.add(k)
        out.append(dict(point, n_components=k))
    return out
