"""Regression model zoo under one fit/predict contract."""

from __future__ import annotations

import numpy as np

from .base import (
    FORMAT_NAME,
    FORMAT_VERSION,
    RegressorSpec,
    TrainedModel,
    load_model,
    model_to_jsonable,
    save_model,
    spec_from_jsonable,
    spec_to_jsonable,
)
from .boosting import GbtModel, fit_gbt
from .forest import RandomForestModel, fit_random_forest
from .linear import (
    LinearModel,
    fit_bayesian_ridge,
    fit_elastic_net,
    fit_multitask_elastic_net,
)
from .mlp import MlpModel, fit_mlp, loss_and_grad
from .pls import PlsModel, fit_pls
from .svr import SvrModel, fit_svr, resolve_gamma
from .tree import DecisionTreeModel, Tree, fit_decision_tree, grow_tree

MODEL_CLASSES = {
    "EN": LinearModel,
    "MTEN": LinearModel,
    "BayesRidge": LinearModel,
    "PLS": PlsModel,
    "SVR": SvrModel,
    "DTR": DecisionTreeModel,
    "RFR": RandomForestModel,
    "GBT": GbtModel,
    "MLP": MlpModel,
}

# classes whose fit consumes a full target matrix rather than one column
MULTITASK_CLASSES = frozenset({"MTEN", "PLS", "GBT", "MLP"})


def fit_model(spec: RegressorSpec, X, Y, validation=None) -> TrainedModel:
    """Dispatch a RegressorSpec to its fit routine.

    Y may be a vector or an (n, T) matrix with NaN for missing cells;
    single-task-only classes require exactly one column. `validation` is
    an (X_val, Y_val) pair consumed by classes that early-stop.
    """
    h = dict(spec.hyperparameters)
    cls = spec.model_class
    if cls not in MODEL_CLASSES:
        raise ValueError(f"unknown model class {cls!r}")
    Y = np.asarray(Y, dtype=float)

    if cls in ("EN", "BayesRidge", "SVR", "DTR", "RFR"):
        if Y.ndim == 2 and Y.shape[1] != 1:
            raise ValueError(f"{cls} is single-task; got {Y.shape[1]} target columns")
        y = Y.ravel()
        if np.isnan(y).any():
            keep = ~np.isnan(y)
            X = np.asarray(X, dtype=float)[keep]
            y = y[keep]

    if cls == "EN":
        return fit_elastic_net(X, y, h["alpha"], h["l1_ratio"], spec.seed)
    if cls == "MTEN":
        return fit_multitask_elastic_net(X, Y, h["alpha"], h["l1_ratio"], spec.seed)
    if cls == "BayesRidge":
        return fit_bayesian_ridge(X, y, spec.seed)
    if cls == "PLS":
        return fit_pls(X, Y, h["n_components"], spec.seed)
    if cls == "SVR":
        return fit_svr(
            X,
            y,
            kernel=h.get("kernel", "rbf"),
            C=h.get("C", 1.0),
            epsilon=h.get("epsilon", 0.1),
            gamma=h.get("gamma", "scale"),
            degree=h.get("degree", 3),
            seed=spec.seed,
        )
    if cls == "DTR":
        return fit_decision_tree(
            X,
            y,
            h.get("min_samples_leaf", 1),
            h.get("min_samples_split", 2),
            spec.seed,
        )
    if cls == "RFR":
        return fit_random_forest(
            X,
            y,
            n_estimators=h.get("n_estimators", 1000),
            min_samples_leaf=h.get("min_samples_leaf", 1),
            min_samples_split=h.get("min_samples_split", 2),
            max_features=h.get("max_features", 1.0),
            seed=spec.seed,
        )
    if cls == "GBT":
        return fit_gbt(
            X,
            Y,
            n_estimators=h.get("n_estimators", 100),
            max_depth=h.get("max_depth", 6),
            reg_lambda=h.get("lambda", 1.0),
            reg_alpha=h.get("alpha", 0.0),
            subsample=h.get("subsample", 1.0),
            learning_rate=h.get("learning_rate", 0.3),
            seed=spec.seed,
        )
    # MLP
    X_val, Y_val = (None, None) if validation is None else validation
    return fit_mlp(
        X,
        Y,
        h["hidden_sizes"],
        dropout=h.get("dropout", 0.0),
        weight_decay=h.get("weight_decay", 0.0),
        learning_rate=h.get("learning_rate", 0.1),
        seed=spec.seed,
        X_val=X_val,
        Y_val=Y_val,
    )


__all__ = [
    "FORMAT_NAME",
    "FORMAT_VERSION",
    "MODEL_CLASSES",
    "MULTITASK_CLASSES",
    "RegressorSpec",
    "TrainedModel",
    "LinearModel",
    "PlsModel",
    "SvrModel",
    "DecisionTreeModel",
    "RandomForestModel",
    "GbtModel",
    "MlpModel",
    "Tree",
    "fit_model",
    "fit_elastic_net",
    "fit_multitask_elastic_net",
    "fit_bayesian_ridge",
    "fit_pls",
    "fit_svr",
    "fit_decision_tree",
    "fit_random_forest",
    "fit_gbt",
    "fit_mlp",
    "grow_tree",
    "loss_and_grad",
    "resolve_gamma",
    "load_model",
    "save_model",
    "model_to_jsonable",
    "spec_to_jsonable",
    "spec_from_jsonable",
]
