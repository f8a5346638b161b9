"""Tuned-model selection, external-test evaluation, single-vs-multi pairing."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import AllTrialsFailedError, LeakageError
from ..models import RegressorSpec, fit_model
from .metrics import score_all
from .plan import CvPlan
from .sweep import TrialResult, prepare_arrays, standardize_split

TEST_THRESHOLD = 0.5

# classes compared in the single-task vs multitask pairing; EN and MTEN
# are two arms of the same linear family
_PAIR_OF = {"EN": "EN/MTEN", "MTEN": "EN/MTEN", "MLP": "MLP", "GBT": "GBT", "PLS": "PLS"}


@dataclass
class TestRun:
    fold: int
    repeat: int
    seed: int
    metrics: dict | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SelectionEntry:
    """One tuned model (the winner of its grid) per group."""

    trial: TrialResult
    selected_for_test: bool = False
    test_runs: list = field(default_factory=list)

    @property
    def representation(self) -> str:
        return self.trial.representation

    @property
    def model_class(self) -> str:
        return self.trial.model_class

    @property
    def target(self) -> str:
        return self.trial.target

    @property
    def multitask(self) -> bool:
        return self.trial.multitask

    @property
    def mean_valid_r2(self) -> float:
        return self.trial.mean_valid_r2

    def test_aggregate(self, metric: str) -> tuple:
        values = [r.metrics[metric] for r in self.test_runs if r.ok]
        if not values:
            return math.nan, math.nan
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return mean, std


@dataclass
class SelectionReport:
    entries: list

    def best_per_target(self) -> dict:
        best = {}
        for entry in self.entries:
            r2 = entry.mean_valid_r2
            if math.isnan(r2):
                continue
            cur = best.get(entry.target)
            if cur is None or r2 > cur.mean_valid_r2:
                best[entry.target] = entry
        return best


def _group_key(trial: TrialResult) -> tuple:
    return (trial.model_class, trial.representation, trial.target, trial.multitask)


def select_tuned(trials) -> SelectionReport:
    """argmax of mean validation R^2 within each (class, representation,
    target) group; ties go to fewer effective parameters, then to the
    earlier grid point."""
    groups: dict = {}
    order: list = []
    for trial in trials:
        key = _group_key(trial)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(trial)

    entries = []
    for key in order:
        candidates = sorted(groups[key], key=lambda t: t.grid_index)
        best = None
        best_r2 = None
        best_eff = None
        for trial in candidates:
            r2 = trial.mean_valid_r2
            if math.isnan(r2):
                continue
            eff = trial.mean_eff_params
            if best is None or r2 > best_r2 or (r2 == best_r2 and eff < best_eff):
                best, best_r2, best_eff = trial, r2, eff
        if best is None:
            cls, representation, target, _ = key
            raise AllTrialsFailedError(
                f"every {cls} trial failed for {representation}/{target}"
            )
        entries.append(SelectionEntry(trial=best))
    return SelectionReport(entries=entries)


def evaluate_test(
    plan: CvPlan,
    tables: dict,
    Y,
    target_names,
    report: SelectionReport,
    threshold: float = TEST_THRESHOLD,
    workers: int = 1,
) -> SelectionReport:
    """Score entries above the validation threshold on the held-out fold.

    Each selected spec is retrained on every CV training split x repeat
    (same derived seeds as tuning), predicts fold 0, and reports the mean
    and spread of the test metrics. `tables` maps representation name to
    its descriptor table.
    """
    target_names = list(target_names)
    chosen = [
        e for e in report.entries
        if not math.isnan(e.mean_valid_r2) and e.mean_valid_r2 > threshold
    ]
    prepared = {}
    for entry in chosen:
        if entry.representation not in prepared:
            prepared[entry.representation] = prepare_arrays(
                plan, tables[entry.representation], Y, target_names
            )

    # one fit serves every entry that shares it (multitask models are
    # selected per target but trained once)
    fit_keys = {}
    for entry in chosen:
        key = (
            entry.representation,
            entry.model_class,
            entry.multitask,
            entry.trial.trained_targets,
            entry.trial.grid_index,
            json.dumps(entry.trial.hyperparameters, sort_keys=True),
        )
        fit_keys.setdefault(key, []).append(entry)

    def run_fit(key_fold_rep):
        key, fold, rep = key_fold_rep
        representation, model_class, multitask, _, grid_index, _hp = key
        X, Ymat, fold_of = prepared[representation]
        entry = fit_keys[key][0]
        seed = plan.run_seed(model_class, grid_index, fold, rep)
        train_folds = tuple(f for f in plan.cv_folds if f != fold)
        train_rows = np.isin(fold_of, train_folds)
        val_rows = fold_of == fold
        test_rows = fold_of == plan.test_fold
        if (train_rows & test_rows).any() or (val_rows & test_rows).any():
            raise LeakageError("test-fold compounds entered a training split")
        Xtr, Xval, Xte = standardize_split(
            X[train_rows], X[val_rows], X[test_rows]
        )
        spec = RegressorSpec(model_class, entry.trial.hyperparameters, seed)
        if multitask:
            # retrain on the same task set the trial was tuned with, which
            # may be a subset of the targets passed here
            cols = [target_names.index(t) for t in entry.trial.trained_targets]
            y_train = Ymat[np.ix_(train_rows, cols)]
            y_val = Ymat[np.ix_(val_rows, cols)]
        else:
            col = target_names.index(entry.target)
            y_train = Ymat[train_rows, col]
            y_val = Ymat[val_rows, col]
        try:
            model = fit_model(spec, Xtr, y_train, validation=(Xval, y_val))
            pred = model.predict(Xte)
        except Exception as exc:
            return key_fold_rep, None, f"{type(exc).__name__}: {exc}", seed
        return key_fold_rep, pred, None, seed

    tasks = []
    for key, group in fit_keys.items():
        model_class = key[1]
        for fold in plan.cv_folds:
            for rep in range(plan.repeats_for(model_class)):
                tasks.append((key, fold, rep))
    tasks.sort(key=lambda t: (str(t[0]), t[1], t[2]))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(run_fit, tasks))
    else:
        raw = [run_fit(t) for t in tasks]
    raw.sort(key=lambda item: (str(item[0][0]), item[0][1], item[0][2]))

    for entry in chosen:
        entry.selected_for_test = True
        entry.test_runs = []
    for (key, fold, rep), pred, error, seed in raw:
        X, Ymat, fold_of = prepared[key[0]]
        test_rows = fold_of == plan.test_fold
        for entry in fit_keys[key]:
            run = TestRun(fold, rep, seed)
            if error is not None:
                run.error = error
            else:
                col = target_names.index(entry.target)
                if entry.multitask:
                    pred_col = pred[:, entry.trial.trained_targets.index(entry.target)]
                else:
                    pred_col = pred[:, 0]
                try:
                    run.metrics = score_all(Ymat[test_rows, col], pred_col)
                except Exception as exc:
                    run.error = f"{type(exc).__name__}: {exc}"
            entry.test_runs.append(run)
    return report


@dataclass
class PairRow:
    pair: str
    representation: str
    target: str
    single_r2: float
    multi_r2: float

    @property
    def multi_wins(self) -> bool:
        return self.multi_r2 > self.single_r2


@dataclass
class PairingTable:
    rows: list
    missing: list

    @property
    def n_pairs(self) -> int:
        return len(self.rows)

    @property
    def n_multi_wins(self) -> int:
        return sum(1 for row in self.rows if row.multi_wins)


def compare_single_vs_multi(trials) -> PairingTable:
    """Best single-task vs best multitask validation R^2 per
    (class family, representation, target). A strictly higher multitask
    score counts as a win; groups lacking one arm are listed, not fatal."""
    best: dict = {}
    for trial in trials:
        pair = _PAIR_OF.get(trial.model_class)
        if pair is None:
            continue
        r2 = trial.mean_valid_r2
        if math.isnan(r2):
            continue
        arm = "multi" if trial.multitask else "single"
        key = (pair, trial.representation, trial.target)
        arms = best.setdefault(key, {})
        if arm not in arms or r2 > arms[arm]:
            arms[arm] = r2

    rows, missing = [], []
    for key in sorted(best):
        pair, representation, target = key
        arms = best[key]
        if "single" in arms and "multi" in arms:
            rows.append(
                PairRow(pair, representation, target, arms["single"], arms["multi"])
            )
        else:
            lacking = "multi" if "single" in arms else "single"
            missing.append(f"{pair} {representation}/{target}: no {lacking} arm")
    return PairingTable(rows=rows, missing=missing)
