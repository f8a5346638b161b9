"""Preprocessing of the raw physicochemical-property export.

The raw export carries 57 property columns per compound, several of which
are constant, entirely missing, or non-numeric helper columns. Two pKa
columns hold semicolon-separated lists; they are reduced to the single
strongest value each before the list columns are dropped.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from ..errors import SchemaError, TableParseError
from .csvio import read_csv
from .tables import DescriptorTable

ACID_PKA_COLUMN = "pKa(Acid)|pKa"
BASE_PKA_COLUMN = "pKa(Base)|pKa"
ACID_SCALAR = "1st strongest acid pKa"
BASE_SCALAR = "1st strongest base pKa"

VARIANCE_TOL = 1e-10


def canonical_percepta_columns() -> list[str]:
    """The 38 property names retained after preprocessing, in order."""
    text = (
        resources.files("permlab.data")
        .joinpath("percepta_columns.txt")
        .read_text(encoding="utf-8")
    )
    return [line for line in text.splitlines() if line.strip()]


def _parse_pka_list(text: str) -> list[float]:
    values = []
    for tok in text.split(";"):
        tok = tok.strip()
        if not tok or tok.lower() in ("nan", "na", "none"):
            continue
        values.append(float(tok))
    return values


def preprocess_percepta(path) -> DescriptorTable:
    """Reduce a raw property export CSV to the retained descriptor set.

    Steps, in order: derive the strongest acid (minimum of the acid list)
    and strongest base (maximum of the base list) scalars, drop columns
    that are non-numeric, entirely missing, or have variance below 1e-10,
    then restrict to the canonical 38-name set when every name survived.
    """
    header, rows = read_csv(path)
    if "compound_id" not in header:
        raise SchemaError(f"{path}: missing compound_id column")
    if ACID_PKA_COLUMN not in header or BASE_PKA_COLUMN not in header:
        raise SchemaError(
            f"{path}: pKa source columns {ACID_PKA_COLUMN!r} and "
            f"{BASE_PKA_COLUMN!r} are required"
        )
    id_col = header.index("compound_id")
    fold_col = header.index("fold") if "fold" in header else None
    acid_col = header.index(ACID_PKA_COLUMN)
    base_col = header.index(BASE_PKA_COLUMN)

    ids, folds = [], []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise TableParseError(
                f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}"
            )
        ids.append(row[id_col].strip())
        if fold_col is not None:
            try:
                folds.append(int(row[fold_col]))
            except ValueError:
                raise TableParseError(f"{path}: row {i + 2}: bad fold {row[fold_col]!r}")

    skip = {id_col, fold_col, acid_col, base_col}
    property_cols = [j for j in range(len(header)) if j not in skip]

    names: list[str] = []
    columns: list[np.ndarray] = []
    for j in property_cols:
        values = np.full(len(rows), np.nan)
        numeric = True
        for i, row in enumerate(rows):
            text = row[j].strip()
            if text == "" or text.lower() in ("nan", "na", "none"):
                continue
            try:
                values[i] = float(text)
            except ValueError:
                numeric = False
                break
        if numeric:
            names.append(header[j])
            columns.append(values)

    for name, col, reduce_fn in (
        (ACID_SCALAR, acid_col, min),
        (BASE_SCALAR, base_col, max),
    ):
        values = np.full(len(rows), np.nan)
        for i, row in enumerate(rows):
            try:
                parsed = _parse_pka_list(row[col])
            except ValueError:
                raise TableParseError(
                    f"{path}: row {i + 2}, column {header[col]!r}: "
                    f"cannot parse pKa list {row[col]!r}"
                )
            if parsed:
                values[i] = reduce_fn(parsed)
        names.append(name)
        columns.append(values)

    kept_names, kept_cols = [], []
    for name, values in zip(names, columns):
        present = values[~np.isnan(values)]
        if present.size == 0:
            continue
        if np.var(present) < VARIANCE_TOL:
            continue
        kept_names.append(name)
        kept_cols.append(values)

    canonical = canonical_percepta_columns()
    if set(canonical) <= set(kept_names):
        order = [kept_names.index(name) for name in canonical]
        kept_names = [kept_names[i] for i in order]
        kept_cols = [kept_cols[i] for i in order]
        representation = "percepta"
    else:
        # Fallback for partial exports: keep whatever survived the filter.
        representation = "percepta_filtered"

    return DescriptorTable(
        representation=representation,
        compound_ids=ids,
        feature_names=kept_names,
        matrix=np.column_stack(kept_cols) if kept_cols else np.empty((len(ids), 0)),
        folds=folds if fold_col is not None else None,
    )
