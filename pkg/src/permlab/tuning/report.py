"""trials.csv / selection.csv emission with "mean (std)" cells."""

from __future__ import annotations

import json

from ..data.csvio import write_csv
from .select import SelectionReport


def mean_std(pair) -> str:
    mean, std = pair
    return f"{mean:.4f} ({std:.4f})"


def _hp_json(hyperparameters: dict) -> str:
    return json.dumps(hyperparameters, sort_keys=True, separators=(",", ":"))


def _trial_sort_key(trial):
    return (
        trial.representation,
        trial.target,
        trial.model_class,
        trial.multitask,
        trial.grid_index,
    )


TRIALS_HEADER = [
    "representation",
    "target",
    "model_class",
    "multitask",
    "grid_index",
    "hyperparameters",
    "n_runs",
    "n_failed",
    "corr_train",
    "corr_valid",
    "r2_train",
    "r2_valid",
    "rmse_train",
    "rmse_valid",
    "r2_valid_mean",
]


def write_trials_csv(path, trials) -> None:
    rows = []
    for trial in sorted(trials, key=_trial_sort_key):
        rows.append(
            [
                trial.representation,
                trial.target,
                trial.model_class,
                int(trial.multitask),
                trial.grid_index,
                _hp_json(trial.hyperparameters),
                len(trial.runs),
                sum(1 for r in trial.runs if not r.ok),
                mean_std(trial.aggregate("train", "corr")),
                mean_std(trial.aggregate("valid", "corr")),
                mean_std(trial.aggregate("train", "r2")),
                mean_std(trial.aggregate("valid", "r2")),
                mean_std(trial.aggregate("train", "rmse")),
                mean_std(trial.aggregate("valid", "rmse")),
                trial.mean_valid_r2,
            ]
        )
    write_csv(path, TRIALS_HEADER, rows)


SELECTION_HEADER = [
    "representation",
    "target",
    "model_class",
    "multitask",
    "grid_index",
    "hyperparameters",
    "corr_train",
    "corr_valid",
    "corr_test",
    "r2_train",
    "r2_valid",
    "r2_test",
    "rmse_train",
    "rmse_valid",
    "rmse_test",
    "r2_valid_mean",
    "r2_test_mean",
    "selected_for_test",
    "best_for_target",
]


def write_selection_csv(path, report: SelectionReport) -> None:
    best = {id(entry) for entry in report.best_per_target().values()}
    rows = []
    for entry in sorted(report.entries, key=lambda e: _trial_sort_key(e.trial)):
        trial = entry.trial
        if entry.selected_for_test and entry.test_runs:
            corr_test = mean_std(entry.test_aggregate("corr"))
            r2_test = mean_std(entry.test_aggregate("r2"))
            rmse_test = mean_std(entry.test_aggregate("rmse"))
            r2_test_mean = entry.test_aggregate("r2")[0]
        else:
            corr_test = r2_test = rmse_test = ""
            r2_test_mean = None
        rows.append(
            [
                trial.representation,
                trial.target,
                trial.model_class,
                int(trial.multitask),
                trial.grid_index,
                _hp_json(trial.hyperparameters),
                mean_std(trial.aggregate("train", "corr")),
                mean_std(trial.aggregate("valid", "corr")),
                corr_test,
                mean_std(trial.aggregate("train", "r2")),
                mean_std(trial.aggregate("valid", "r2")),
                r2_test,
                mean_std(trial.aggregate("train", "rmse")),
                mean_std(trial.aggregate("valid", "rmse")),
                rmse_test,
                trial.mean_valid_r2,
                r2_test_mean,
                int(entry.selected_for_test),
                int(id(entry) in best),
            ]
        )
    write_csv(path, SELECTION_HEADER, rows)


PAIRING_HEADER = [
    "pair",
    "representation",
    "target",
    "single_r2",
    "multi_r2",
    "multi_wins",
]


def write_pairing_csv(path, table) -> None:
    rows = [
        [
            row.pair,
            row.representation,
            row.target,
            row.single_r2,
            row.multi_r2,
            int(row.multi_wins),
        ]
        for row in table.rows
    ]
    write_csv(path, PAIRING_HEADER, rows)
