"""Core table types: plate measurements, descriptor matrices, folds, stats."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..assay import MEMBRANES, aggregate_repeats
from ..errors import (
    DimensionMismatchError,
    SchemaError,
    TableParseError,
    ZeroVarianceError,
)
from .csvio import parse_float, read_csv, write_csv

MEASUREMENT_KINDS = ("MR", "Pe", "LogPe")

# Feature-space sizes of the five published representations.
EXPECTED_DIMS = {"percepta": 38, "rdkit": 96, "cddd": 512, "molbert": 768}
ECFP_WIDTH = 2000

LOGPE_CONSISTENCY_TOL = 1e-6


def measurement_columns() -> list[str]:
    cols = ["compound_id", "plate_number"]
    for membrane in MEMBRANES:
        for kind in MEASUREMENT_KINDS:
            cols.append(f"{membrane}_{kind}")
    return cols


@dataclass(frozen=True)
class PlateRecord:
    """One compound x plate x repeat row of raw/derived assay values."""

    compound_id: str
    plate_number: int
    mr: dict
    pe: dict
    log_pe: dict


@dataclass
class MeasurementTable:
    records: list

    def __len__(self):
        return len(self.records)

    def compound_ids(self) -> list[str]:
        seen = {}
        for r in self.records:
            seen.setdefault(r.compound_id, None)
        return list(seen)

    def by_compound(self) -> dict[str, list]:
        grouped: dict[str, list] = {}
        for r in self.records:
            grouped.setdefault(r.compound_id, []).append(r)
        return grouped

    def mean_log_pe(self) -> dict[str, dict]:
        """Per-compound repeat-averaged logPe for each membrane."""
        return {
            cid: aggregate_repeats(rows) for cid, rows in self.by_compound().items()
        }

    def log_pe_matrix(self) -> tuple[list[str], np.ndarray]:
        """Compounds x 6 membranes matrix of mean logPe (NaN where missing)."""
        means = self.mean_log_pe()
        ids = list(means)
        X = np.full((len(ids), len(MEMBRANES)), np.nan)
        for i, cid in enumerate(ids):
            for j, membrane in enumerate(MEMBRANES):
                value = means[cid][membrane]
                if value is not None:
                    X[i, j] = value
        return ids, X


def load_measurements(path) -> MeasurementTable:
    """Load the per-repeat plate measurement CSV.

    Blank cells are missing values. The logPe cell, when present together
    with its Pe cell, must equal log10(Pe) within 1e-6.
    """
    header, rows = read_csv(path)
    expected = measurement_columns()
    missing = [c for c in expected if c not in header]
    extra = [c for c in header if c not in expected]
    if missing or extra:
        raise SchemaError(
            f"{path}: measurement schema mismatch; "
            f"missing columns {missing}, unexpected columns {extra}"
        )
    col = {name: header.index(name) for name in expected}
    records = []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise TableParseError(
                f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}"
            )
        cid = row[col["compound_id"]].strip()
        if not cid:
            raise TableParseError(f"{path}: row {i + 2}: empty compound_id")
        plate_text = row[col["plate_number"]].strip()
        try:
            plate = int(plate_text)
        except ValueError:
            raise TableParseError(
                f"{path}: row {i + 2}, column 'plate_number': "
                f"cannot parse {plate_text!r} as an integer"
            )
        mr, pe, log_pe = {}, {}, {}
        for membrane in MEMBRANES:
            mr[membrane] = parse_float(row[col[f"{membrane}_MR"]], path, i, f"{membrane}_MR")
            pe[membrane] = parse_float(row[col[f"{membrane}_Pe"]], path, i, f"{membrane}_Pe")
            log_pe[membrane] = parse_float(
                row[col[f"{membrane}_LogPe"]], path, i, f"{membrane}_LogPe"
            )
            if pe[membrane] is not None and log_pe[membrane] is not None:
                if pe[membrane] <= 0:
                    raise TableParseError(
                        f"{path}: row {i + 2}: {membrane}_Pe <= 0 with logPe present"
                    )
                if abs(log_pe[membrane] - math.log10(pe[membrane])) > LOGPE_CONSISTENCY_TOL:
                    raise TableParseError(
                        f"{path}: row {i + 2}: {membrane}_LogPe inconsistent "
                        f"with log10({membrane}_Pe)"
                    )
        records.append(
            PlateRecord(compound_id=cid, plate_number=plate, mr=mr, pe=pe, log_pe=log_pe)
        )
    return MeasurementTable(records)


def write_measurements(path, table: MeasurementTable) -> None:
    rows = []
    for r in table.records:
        row = [r.compound_id, r.plate_number]
        for membrane in MEMBRANES:
            row.extend([r.mr[membrane], r.pe[membrane], r.log_pe[membrane]])
        rows.append(row)
    write_csv(path, measurement_columns(), rows)


def write_mean_measurements(path, table: MeasurementTable) -> None:
    """Repeat-averaged table: one row per compound, means of available repeats."""
    grouped = table.by_compound()
    header = ["compound_id"]
    for membrane in MEMBRANES:
        for kind in MEASUREMENT_KINDS:
            header.append(f"{membrane}_{kind}")
    rows = []
    for cid, recs in grouped.items():
        row = [cid]
        for membrane in MEMBRANES:
            for attr in ("mr", "pe", "log_pe"):
                values = [
                    getattr(r, attr)[membrane]
                    for r in recs
                    if getattr(r, attr)[membrane] is not None
                ]
                row.append(sum(values) / len(values) if values else None)
        rows.append(row)
    write_csv(path, header, rows)


@dataclass
class FoldAssignment:
    """compound_id -> fold index; fold 0 is the external test set."""

    mapping: dict
    n_folds: int = 5

    def __post_init__(self):
        sizes = [0] * self.n_folds
        for cid, fold in self.mapping.items():
            if not (0 <= fold < self.n_folds):
                raise SchemaError(f"compound {cid!r}: fold {fold} out of range")
            sizes[fold] += 1
        if self.mapping and max(sizes) - min(sizes) > 1:
            raise SchemaError(f"fold sizes {sizes} differ by more than 1")

    def fold_of(self, compound_id: str) -> int:
        return self.mapping[compound_id]

    def ids_in_fold(self, fold: int) -> list[str]:
        return [cid for cid, f in self.mapping.items() if f == fold]

    def sizes(self) -> list[int]:
        sizes = [0] * self.n_folds
        for fold in self.mapping.values():
            sizes[fold] += 1
        return sizes


@dataclass
class DescriptorTable:
    """Compound x feature matrix of one molecular representation.

    Dense representations carry ``matrix``; the fingerprint representation
    carries per-compound sorted active-bit tuples in ``bits`` plus the
    folded ``width``.
    """

    representation: str
    compound_ids: list
    feature_names: list = field(default_factory=list)
    matrix: np.ndarray | None = None
    bits: list | None = None
    width: int | None = None
    folds: list | None = None

    def __post_init__(self):
        if len(set(self.compound_ids)) != len(self.compound_ids):
            raise SchemaError(
                f"{self.representation}: duplicate compound ids in descriptor table"
            )
        if (self.matrix is None) == (self.bits is None):
            raise SchemaError("descriptor table must be dense xor sparse")
        if self.matrix is not None:
            self.matrix = np.asarray(self.matrix, dtype=float)
            if self.matrix.shape != (len(self.compound_ids), len(self.feature_names)):
                raise SchemaError(
                    f"{self.representation}: matrix shape {self.matrix.shape} does not "
                    f"match {len(self.compound_ids)} ids x {len(self.feature_names)} features"
                )
        else:
            if self.width is None:
                raise SchemaError("sparse descriptor table requires a width")
            for cid, row in zip(self.compound_ids, self.bits):
                if any(b < 0 or b >= self.width for b in row):
                    raise SchemaError(f"{cid}: fingerprint bit outside width {self.width}")
        expected = EXPECTED_DIMS.get(self.representation)
        if expected is not None and self.n_features != expected:
            raise SchemaError(
                f"{self.representation}: expected {expected} features, "
                f"got {self.n_features}"
            )
        if self.representation == "ecfp" and self.width != ECFP_WIDTH:
            raise SchemaError(f"ecfp width must be {ECFP_WIDTH}, got {self.width}")
        if self.folds is not None and len(self.folds) != len(self.compound_ids):
            raise SchemaError("fold column length mismatch")

    @property
    def is_sparse(self) -> bool:
        return self.bits is not None

    @property
    def n_compounds(self) -> int:
        return len(self.compound_ids)

    @property
    def n_features(self) -> int:
        if self.matrix is not None:
            return self.matrix.shape[1]
        return self.width

    def dense(self) -> np.ndarray:
        """Feature matrix; sparse bit rows materialize to a 0/1 matrix."""
        if self.matrix is not None:
            return self.matrix
        X = np.zeros((self.n_compounds, self.width))
        for i, row in enumerate(self.bits):
            for b in row:
                X[i, b] = 1.0
        return X

    def subset(self, indices) -> "DescriptorTable":
        indices = list(indices)
        return DescriptorTable(
            representation=self.representation,
            compound_ids=[self.compound_ids[i] for i in indices],
            feature_names=list(self.feature_names),
            matrix=None if self.matrix is None else self.matrix[indices],
            bits=None if self.bits is None else [self.bits[i] for i in indices],
            width=self.width,
            folds=None if self.folds is None else [self.folds[i] for i in indices],
        )

    def fold_assignment(self, n_folds: int = 5) -> FoldAssignment:
        if self.folds is None:
            raise SchemaError(f"{self.representation}: table carries no fold column")
        return FoldAssignment(dict(zip(self.compound_ids, self.folds)), n_folds)


def load_descriptor_table(path, representation: str) -> DescriptorTable:
    """Dense descriptor CSV: compound_id, fold, then one column per feature."""
    header, rows = read_csv(path)
    if len(header) < 3 or header[0] != "compound_id" or header[1] != "fold":
        raise SchemaError(
            f"{path}: expected header starting with compound_id,fold; got {header[:3]}"
        )
    feature_names = header[2:]
    ids, folds = [], []
    X = np.empty((len(rows), len(feature_names)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise TableParseError(
                f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}"
            )
        ids.append(row[0].strip())
        try:
            folds.append(int(row[1]))
        except ValueError:
            raise TableParseError(f"{path}: row {i + 2}: bad fold {row[1]!r}")
        for j, name in enumerate(feature_names):
            value = parse_float(row[2 + j], path, i, name)
            X[i, j] = np.nan if value is None else value
    return DescriptorTable(
        representation=representation,
        compound_ids=ids,
        feature_names=feature_names,
        matrix=X,
        folds=folds,
    )


def load_ecfp_table(path, width: int = ECFP_WIDTH) -> DescriptorTable:
    """Sparse fingerprint CSV: compound_id, fold, space-separated bit indices."""
    header, rows = read_csv(path)
    if header[:2] != ["compound_id", "fold"] or len(header) != 3:
        raise SchemaError(
            f"{path}: expected header compound_id,fold,bits; got {header}"
        )
    ids, folds, bits = [], [], []
    for i, row in enumerate(rows):
        ids.append(row[0].strip())
        try:
            folds.append(int(row[1]))
        except ValueError:
            raise TableParseError(f"{path}: row {i + 2}: bad fold {row[1]!r}")
        try:
            active = tuple(sorted({int(tok) for tok in row[2].split()}))
        except ValueError:
            raise TableParseError(f"{path}: row {i + 2}: bad bit list {row[2]!r}")
        bits.append(active)
    return DescriptorTable(
        representation="ecfp",
        compound_ids=ids,
        bits=bits,
        width=width,
        folds=folds,
    )


def write_descriptor_table(path, table: DescriptorTable) -> None:
    if table.is_sparse:
        header = ["compound_id", "fold", "bits"]
        rows = [
            [cid, fold, " ".join(str(b) for b in row)]
            for cid, fold, row in zip(table.compound_ids, table.folds, table.bits)
        ]
    else:
        header = ["compound_id", "fold"] + list(table.feature_names)
        folds = table.folds if table.folds is not None else [0] * table.n_compounds
        rows = [
            [cid, fold] + [float(v) for v in table.matrix[i]]
            for i, (cid, fold) in enumerate(zip(table.compound_ids, folds))
        ]
    write_csv(path, header, rows)


@dataclass
class NormalizationStats:
    """Per-column mean/std reference used for standardization."""

    feature_names: list
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        self.stds = np.asarray(self.stds, dtype=float)
        bad = [
            name
            for name, s in zip(self.feature_names, self.stds)
            if not s > 0
        ]
        if bad:
            raise ZeroVarianceError(f"non-positive std for columns {bad}")

    def to_json(self, path) -> None:
        payload = {
            name: {"mean": float(m), "std": float(s)}
            for name, m, s in zip(self.feature_names, self.means, self.stds)
        }
        Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "NormalizationStats":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        names, means, stds = [], [], []
        for name, value in payload.items():
            names.append(name)
            if isinstance(value, dict):
                means.append(float(value["mean"]))
                stds.append(float(value["std"]))
            else:
                means.append(float(value[0]))
                stds.append(float(value[1]))
        return cls(names, np.array(means), np.array(stds))


def standardize(
    table: DescriptorTable, stats: NormalizationStats | None = None
) -> tuple[DescriptorTable, NormalizationStats]:
    """Column-wise (x - mean)/std transform of a dense descriptor table.

    When ``stats`` is given (typically fitted on training folds only) it is
    applied as-is; otherwise population-std stats are computed from the
    table itself and returned alongside.
    """
    if table.is_sparse:
        raise SchemaError("standardize requires a dense descriptor table")
    X = table.matrix
    if stats is None:
        means = X.mean(axis=0)
        stds = X.std(axis=0)  # population convention
        zero = [name for name, s in zip(table.feature_names, stds) if not s > 0]
        if zero:
            raise ZeroVarianceError(f"zero-variance columns {zero}")
        stats = NormalizationStats(list(table.feature_names), means, stds)
    else:
        if list(stats.feature_names) != list(table.feature_names):
            raise DimensionMismatchError(
                "normalization stats do not match table columns"
            )
    transformed = DescriptorTable(
        representation=table.representation,
        compound_ids=list(table.compound_ids),
        feature_names=list(table.feature_names),
        matrix=(X - stats.means) / stats.stds,
        folds=None if table.folds is None else list(table.folds),
    )
    return transformed, stats
