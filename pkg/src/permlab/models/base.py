"""Shared fit/predict contract and versioned model serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatchError

FORMAT_NAME = "permlab-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RegressorSpec:
    """Model class name, hyperparameter map, and seed for one fit."""

    model_class: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def key(self) -> tuple:
        return (
            self.model_class,
            tuple(sorted(self.hyperparameters.items())),
            self.seed,
        )


class TrainedModel:
    """Base for fitted regressors: deterministic, immutable prediction.

    Predictions are always (n, n_tasks), single-task models included.
    """

    def __init__(self, spec: RegressorSpec, n_features: int, n_tasks: int):
        self.spec = spec
        self.n_features = n_features
        self.n_tasks = n_tasks

    def _check_input(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"{self.spec.model_class}: input has {X.shape[1]} features, "
                f"model was fitted on {self.n_features}"
            )
        return X

    def predict(self, X) -> np.ndarray:
        X = self._check_input(X)
        return self._predict(X)

    def _predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def effective_parameters(self) -> int:
        """Fitted-complexity counter used for selection tie-breaking."""
        raise NotImplementedError

    def params_to_jsonable(self) -> dict:
        raise NotImplementedError

    @classmethod
    def params_from_jsonable(cls, spec, payload) -> "TrainedModel":
        raise NotImplementedError


def _array(x) -> list:
    return np.asarray(x, dtype=float).tolist()


def spec_to_jsonable(spec: RegressorSpec) -> dict:
    return {
        "model_class": spec.model_class,
        "hyperparameters": dict(spec.hyperparameters),
        "seed": spec.seed,
    }


def spec_from_jsonable(payload: dict) -> RegressorSpec:
    return RegressorSpec(
        model_class=payload["model_class"],
        hyperparameters=dict(payload["hyperparameters"]),
        seed=int(payload["seed"]),
    )


def model_to_jsonable(model: TrainedModel) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "spec": spec_to_jsonable(model.spec),
        "n_features": model.n_features,
        "n_tasks": model.n_tasks,
        "params": model.params_to_jsonable(),
    }


def save_model(model: TrainedModel, path) -> None:
    # json repr of Python floats round-trips IEEE doubles exactly
    Path(path).write_text(
        json.dumps(model_to_jsonable(model), indent=1), encoding="utf-8"
    )


def load_model(path) -> TrainedModel:
    from . import MODEL_CLASSES  # late import: registry lives in the package root

    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != FORMAT_NAME:
        raise ValueError(f"{path}: not a {FORMAT_NAME} document")
    if payload.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported version {payload.get('version')}")
    spec = spec_from_jsonable(payload["spec"])
    cls = MODEL_CLASSES[spec.model_class]
    model = cls.params_from_jsonable(spec, payload["params"])
    model.n_features = int(payload["n_features"])
    model.n_tasks = int(payload["n_tasks"])
    return model
