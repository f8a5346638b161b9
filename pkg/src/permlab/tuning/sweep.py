"""Exhaustive grid sweep under the 5-fold protocol.

Every (grid point, CV fold, repeat) combination standardizes descriptors
on its 3 training folds, fits, and scores train/validation per target.
Fold 0 never enters a fit or a normalization statistic.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..data.tables import DescriptorTable
from ..errors import LeakageError, SchemaError
from ..models import MULTITASK_CLASSES, RegressorSpec, fit_model
from .grids import clip_pls_grid, default_grid
from .metrics import score_all
from .plan import CvPlan

SINGLE_TASK_ONLY = frozenset({"EN", "BayesRidge", "SVR", "DTR", "RFR"})
FAILURE_WARN_FRACTION = 0.1


@dataclass
class RunRecord:
    """Metrics of one (fold, repeat) run for one target."""

    fold: int
    repeat: int
    seed: int
    train: dict | None = None
    valid: dict | None = None
    eff_params: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class TrialResult:
    representation: str
    model_class: str
    target: str
    trained_targets: tuple
    multitask: bool
    grid_index: int
    hyperparameters: dict
    runs: list = field(default_factory=list)

    @property
    def ok_runs(self) -> list:
        return [r for r in self.runs if r.ok]

    @property
    def failed(self) -> bool:
        return not self.ok_runs

    def aggregate(self, split: str, metric: str) -> tuple:
        """(mean, sample std) of one metric over successful runs."""
        values = [getattr(r, split)[metric] for r in self.ok_runs]
        if not values:
            return math.nan, math.nan
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return mean, std

    @property
    def mean_valid_r2(self) -> float:
        return self.aggregate("valid", "r2")[0]

    @property
    def mean_eff_params(self) -> float:
        values = [r.eff_params for r in self.ok_runs if r.eff_params is not None]
        return float(np.mean(values)) if values else math.inf


def prepare_arrays(plan: CvPlan, table: DescriptorTable, Y, target_names):
    """Align the descriptor table with the plan and shape the targets."""
    ids = list(table.compound_ids)
    if set(ids) != set(plan.folds.mapping):
        raise SchemaError("descriptor table ids do not match the fold assignment")
    fold_of = np.array([plan.folds.fold_of(cid) for cid in ids])
    X = table.dense()
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape != (len(ids), len(target_names)):
        raise SchemaError(
            f"target matrix {Y.shape} does not match "
            f"{len(ids)} compounds x {len(target_names)} targets"
        )
    return X, Y, fold_of


def standardize_split(X_train: np.ndarray, *others):
    """Train-fold column standardization; zero-variance columns are only
    centered (scale pinned to 1) so sparse descriptors survive."""
    mu = X_train.mean(axis=0)
    sd = X_train.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return tuple((A - mu) / sd for A in (X_train, *others))


def _run_one(
    X,
    Y,
    fold_of,
    plan: CvPlan,
    model_class: str,
    multitask: bool,
    grid_index: int,
    point: dict,
    fold: int,
    repeat: int,
    target_names,
) -> dict:
    """One (grid point, fold, repeat) run; returns target -> RunRecord."""
    seed = plan.run_seed(model_class, grid_index, fold, repeat)
    train_folds = tuple(f for f in plan.cv_folds if f != fold)
    train_rows = np.isin(fold_of, train_folds)
    val_rows = fold_of == fold
    if (fold_of[train_rows] == plan.test_fold).any() or (
        fold_of[val_rows] == plan.test_fold
    ).any():
        raise LeakageError("test-fold compounds entered a CV split")

    Xtr, Xval = standardize_split(X[train_rows], X[val_rows])
    Ytr, Yval = Y[train_rows], Y[val_rows]
    records = {}

    def score_run(model, y_train, y_val, columns):
        pred_tr = model.predict(Xtr)
        pred_val = model.predict(Xval)
        eff = model.effective_parameters()
        for col, name in columns:
            record = RunRecord(fold, repeat, seed)
            try:
                record.train = score_all(y_train[:, col], pred_tr[:, col])
                record.valid = score_all(y_val[:, col], pred_val[:, col])
                record.eff_params = eff
            except Exception as exc:
                record.error = f"{type(exc).__name__}: {exc}"
            records[name] = record

    if multitask:
        spec = RegressorSpec(model_class, point, seed)
        try:
            model = fit_model(spec, Xtr, Ytr, validation=(Xval, Yval))
        except Exception as exc:
            message = f"{type(exc).__name__}: {exc}"
            return {
                name: RunRecord(fold, repeat, seed, error=message)
                for name in target_names
            }
        score_run(model, Ytr, Yval, list(enumerate(target_names)))
    else:
        for col, name in enumerate(target_names):
            spec = RegressorSpec(model_class, point, seed)
            try:
                model = fit_model(
                    spec,
                    Xtr,
                    Ytr[:, col],
                    validation=(Xval, Yval[:, col]),
                )
            except Exception as exc:
                records[name] = RunRecord(
                    fold, repeat, seed, error=f"{type(exc).__name__}: {exc}"
                )
                continue
            score_run(
                model, Ytr[:, col : col + 1], Yval[:, col : col + 1], [(0, name)]
            )
    return records


def resolve_multitask(model_class: str, n_targets: int, multitask) -> bool:
    if multitask is None:
        multitask = model_class in MULTITASK_CLASSES and n_targets > 1
    if multitask and model_class in SINGLE_TASK_ONLY:
        raise ValueError(f"{model_class} cannot train multitask")
    if model_class == "MTEN" and not multitask:
        raise ValueError("MTEN is the multitask arm; use EN for single-task")
    return bool(multitask)


def run_grid(
    plan: CvPlan,
    table: DescriptorTable,
    Y,
    target_names,
    model_class: str,
    grid=None,
    multitask=None,
    workers: int = 1,
) -> list:
    """Sweep a grid; one TrialResult per (grid point, target).

    Multitask classes fit all targets jointly per run and score each
    target; single-task classes fit each target separately. Failures are
    recorded on the affected runs and never abort the sweep.
    """
    target_names = list(target_names)
    X, Ymat, fold_of = prepare_arrays(plan, table, Y, target_names)
    multitask = resolve_multitask(model_class, len(target_names), multitask)
    if grid is None:
        grid = default_grid(model_class)
    grid = [dict(point) for point in grid]
    if model_class == "PLS":
        min_train = min(
            int(np.isin(fold_of, trains).sum()) for _, trains in plan.cv_splits()
        )
        grid = clip_pls_grid(grid, min_train, X.shape[1])

    repeats = plan.repeats_for(model_class)
    tasks = [
        (gi, fold, rep)
        for gi in range(len(grid))
        for fold in plan.cv_folds
        for rep in range(repeats)
    ]

    def work(task):
        gi, fold, rep = task
        return task, _run_one(
            X,
            Ymat,
            fold_of,
            plan,
            model_class,
            multitask,
            gi,
            grid[gi],
            fold,
            rep,
            target_names,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(work, tasks))
    else:
        raw = [work(t) for t in tasks]
    # deterministic reduction regardless of completion order
    raw.sort(key=lambda item: item[0])

    trained = tuple(target_names) if multitask else None
    trials = []
    for gi, point in enumerate(grid):
        per_target = {name: [] for name in target_names}
        for (tgi, fold, rep), records in raw:
            if tgi != gi:
                continue
            for name, record in records.items():
                per_target[name].append(record)
        for name in target_names:
            trials.append(
                TrialResult(
                    representation=table.representation,
                    model_class=model_class,
                    target=name,
                    trained_targets=trained if multitask else (name,),
                    multitask=multitask,
                    grid_index=gi,
                    hyperparameters=dict(point),
                    runs=per_target[name],
                )
            )

    total = sum(len(t.runs) for t in trials)
    failures = sum(1 for t in trials for r in t.runs if not r.ok)
    if total and failures / total > FAILURE_WARN_FRACTION:
        warnings.warn(
            f"{model_class} sweep on {table.representation}: "
            f"{failures}/{total} runs failed",
            RuntimeWarning,
            stacklevel=2,
        )
    return trials
