"""Per-fold elastic-net coefficients as a feature-importance matrix."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data.csvio import parse_float, read_csv, write_csv
from ..errors import SchemaError
from ..models import RegressorSpec, fit_model
from ..tuning.plan import CvPlan
from ..tuning.select import SelectionReport
from ..tuning.sweep import prepare_arrays, standardize_split
from .svg import svg_heatmap


@dataclass
class ImportanceMatrix:
    """Rows are (target, fold) pairs; cells are standardized-feature
    coefficients of the tuned single-task linear model."""

    rows: list  # (target, fold)
    feature_names: list
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.shape != (len(self.rows), len(self.feature_names)):
            raise SchemaError("importance matrix shape mismatch")

    def block(self, target: str) -> np.ndarray:
        idx = [i for i, (t, _) in enumerate(self.rows) if t == target]
        return self.matrix[idx]


def feature_importance(
    plan: CvPlan, table, Y, target_names, report: SelectionReport
) -> ImportanceMatrix:
    """Refit each target's tuned single-task EN on every CV split.

    The 4 rows per target show how stable each coefficient is across the
    inner folds; features the penalty zeroes everywhere give all-zero
    columns.
    """
    target_names = list(target_names)
    entries = {
        e.target: e
        for e in report.entries
        if e.model_class == "EN"
        and not e.multitask
        and e.representation == table.representation
    }
    missing = [t for t in target_names if t not in entries]
    if missing:
        raise SchemaError(f"no tuned single-task EN entry for targets {missing}")

    X, Ymat, fold_of = prepare_arrays(plan, table, Y, target_names)
    rows = []
    coef_rows = []
    for target in target_names:
        entry = entries[target]
        col = target_names.index(target)
        for fold in plan.cv_folds:
            train_rows = np.isin(
                fold_of, [f for f in plan.cv_folds if f != fold]
            )
            (Xtr,) = standardize_split(X[train_rows])
            seed = plan.run_seed("EN", entry.trial.grid_index, fold, 0)
            spec = RegressorSpec("EN", entry.trial.hyperparameters, seed)
            y_col = Ymat[train_rows, col]
            model = fit_model(spec, Xtr, y_col)
            rows.append((target, fold))
            coef_rows.append(model.coef[:, 0])
    return ImportanceMatrix(
        rows=rows,
        feature_names=list(table.feature_names),
        matrix=np.array(coef_rows),
    )


def write_importance_csv(path, im: ImportanceMatrix) -> None:
    header = ["target", "fold"] + [str(n) for n in im.feature_names]
    rows = [
        [target, fold] + [float(v) for v in im.matrix[i]]
        for i, (target, fold) in enumerate(im.rows)
    ]
    write_csv(path, header, rows)


def load_importance_csv(path) -> ImportanceMatrix:
    header, raw = read_csv(path)
    if header[:2] != ["target", "fold"]:
        raise SchemaError(f"{path}: not an importance table")
    feature_names = header[2:]
    rows, data = [], []
    for i, row in enumerate(raw):
        rows.append((row[0], int(row[1])))
        data.append(
            [parse_float(cell, path, i, name) for cell, name in zip(row[2:], feature_names)]
        )
    return ImportanceMatrix(rows, feature_names, np.array(data, dtype=float))


def write_importance_svg(path, im: ImportanceMatrix) -> None:
    labels = [f"{target} f{fold}" for target, fold in im.rows]
    Path(path).write_text(
        svg_heatmap(im.matrix.tolist(), labels, im.feature_names, "coefficient heatmap"),
        encoding="utf-8",
    )
