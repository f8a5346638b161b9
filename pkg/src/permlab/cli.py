"""Command-line entry point wiring every module into config-driven runs.

Exit codes: 0 success, 1 runtime failure, 2 config or schema error. Every
command writes its outputs under one directory together with a
manifest.json listing a content hash per file, so rerun equality is
checkable from the manifests alone.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analyze import (
    feature_importance,
    scaffold_report,
    top_bottom_profiles,
    write_importance_csv,
    write_importance_svg,
    write_profiles_csv,
    write_profiles_svg,
    write_scaffolds_csv,
)
from .assay import MEMBRANES, WellConcentrations, well_result
from .chem import canonical_smiles, desalt, parse_smiles
from .config import KNOWN_REPRESENTATIONS, RunConfig, load_config
from .data.csvio import parse_float, read_csv, write_csv
from .data.synth import assign_folds
from .data.tables import (
    FoldAssignment,
    MeasurementTable,
    PlateRecord,
    load_descriptor_table,
    load_ecfp_table,
    load_measurements,
    measurement_columns,
    write_mean_measurements,
    write_measurements,
)
from .design import (
    MODEL_FAMILIES,
    CandidatePool,
    d_optimal_select,
    forward_feature_select,
)
from .errors import ConfigError, PermlabError, SchemaError, TableParseError
from .pca import pca_fit, pca_transform
from .tuning import (
    CvPlan,
    RunRecord,
    TrialResult,
    compare_single_vs_multi,
    evaluate_test,
    run_grid,
    select_tuned,
    write_pairing_csv,
    write_selection_csv,
    write_trials_csv,
)
from .tuning.sweep import SINGLE_TASK_ONLY

RAW_CONCENTRATION_COLUMNS = [
    "compound_id",
    "plate_number",
    "membrane",
    "donor_initial",
    "donor_final",
    "acceptor_final",
]

SMILES_COLUMNS = ("compound_id", "smiles")

# classes with both a single-task and a joint multitask arm
DUAL_ARM_CLASSES = ("PLS", "GBT", "MLP")


class OutputSink:
    """Output directory plus the content hashes of everything written."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.hashes: dict = {}

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def emit(self, name: str, writer, *args, **kwargs) -> Path:
        path = self.path(name)
        writer(path, *args, **kwargs)
        self.hashes[name] = hashlib.sha256(path.read_bytes()).hexdigest()
        return path

    def emit_text(self, name: str, text: str) -> Path:
        path = self.path(name)
        path.write_text(text, encoding="utf-8")
        self.hashes[name] = hashlib.sha256(path.read_bytes()).hexdigest()
        return path

    def write_manifest(self, cfg: RunConfig, failures=()) -> Path:
        manifest = {
            "version": __version__,
            "config_sha256": cfg.config_hash(),
            "seed": cfg.seed,
            "outputs": dict(sorted(self.hashes.items())),
            "failures": list(failures),
        }
        path = self.path("manifest.json")
        path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return path


# ---------------------------------------------------------------- inputs


def load_concentrations(path, geometry) -> MeasurementTable:
    """Long-format raw well concentrations -> derived measurement table.

    One row per (compound, plate, membrane) well; every concentration cell
    must be present. Missing membranes of a plate stay missing in the
    output; non-penetrant wells keep their retention with no permeability.
    """
    header, rows = read_csv(path)
    if header != RAW_CONCENTRATION_COLUMNS:
        raise SchemaError(
            f"{path}: concentration schema mismatch; expected columns "
            f"{RAW_CONCENTRATION_COLUMNS}, got {header}"
        )
    grouped: dict = {}
    order: list = []
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != len(header):
            raise TableParseError(
                f"{path}: row {line} has {len(row)} cells, expected {len(header)}"
            )
        cid = row[0].strip()
        if not cid:
            raise TableParseError(f"{path}: row {line}: empty compound_id")
        try:
            plate = int(row[1])
        except ValueError:
            raise TableParseError(
                f"{path}: row {line}: cannot parse plate_number {row[1]!r}"
            )
        membrane = row[2].strip()
        if membrane not in MEMBRANES:
            raise TableParseError(
                f"{path}: row {line}: unknown membrane {membrane!r}"
            )
        values = []
        for j, column in enumerate(RAW_CONCENTRATION_COLUMNS[3:]):
            value = parse_float(row[3 + j], path, i, column)
            if value is None:
                raise TableParseError(
                    f"{path}: row {line}: missing {column} value"
                )
            values.append(value)
        try:
            wells = WellConcentrations(*values)
        except ValueError as exc:
            raise TableParseError(f"{path}: row {line}: {exc}")
        key = (cid, plate)
        if key not in grouped:
            grouped[key] = {}
            order.append(key)
        if membrane in grouped[key]:
            raise TableParseError(
                f"{path}: row {line}: duplicate well {cid}/{plate}/{membrane}"
            )
        grouped[key][membrane] = well_result(wells, geometry)
    records = []
    for cid, plate in order:
        wells = grouped[(cid, plate)]
        mr, pe, log_pe = {}, {}, {}
        for membrane in MEMBRANES:
            result = wells.get(membrane)
            mr[membrane] = None if result is None else result.membrane_retention
            pe[membrane] = None if result is None else result.effective_permeability
            log_pe[membrane] = None if result is None else result.log_pe
        records.append(PlateRecord(cid, plate, mr, pe, log_pe))
    return MeasurementTable(records)


def sniff_measurements(path, geometry) -> MeasurementTable:
    """Load either the derived measurement schema or raw concentrations."""
    header, _ = read_csv(path)
    if header == RAW_CONCENTRATION_COLUMNS:
        return load_concentrations(path, geometry)
    if set(header) == set(measurement_columns()):
        return load_measurements(path)
    raise SchemaError(
        f"{path}: header matches neither the measurement schema nor the "
        f"raw concentration schema; got {header}"
    )


def load_smiles_csv(path) -> dict:
    """compound_id -> SMILES from a CSV that carries those two columns."""
    header, rows = read_csv(path)
    for column in SMILES_COLUMNS:
        if column not in header:
            raise SchemaError(f"{path}: missing required column {column!r}")
    cid_col = header.index("compound_id")
    smi_col = header.index("smiles")
    out: dict = {}
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise TableParseError(
                f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}"
            )
        cid = row[cid_col].strip()
        if not cid:
            raise TableParseError(f"{path}: row {i + 2}: empty compound_id")
        if cid in out:
            raise TableParseError(f"{path}: row {i + 2}: duplicate compound {cid!r}")
        out[cid] = row[smi_col].strip()
    return out


def load_fold_file(path) -> FoldAssignment:
    header, rows = read_csv(path)
    if header != ["compound_id", "fold"]:
        raise SchemaError(
            f"{path}: fold file must have columns compound_id,fold; got {header}"
        )
    mapping: dict = {}
    for i, row in enumerate(rows):
        cid = row[0].strip()
        try:
            fold = int(row[1])
        except ValueError:
            raise TableParseError(
                f"{path}: row {i + 2}: cannot parse fold {row[1]!r}"
            )
        if cid in mapping:
            raise TableParseError(f"{path}: row {i + 2}: duplicate compound {cid!r}")
        mapping[cid] = fold
    return FoldAssignment(mapping)


def load_representation(rep: str, path):
    if rep == "ecfp":
        return load_ecfp_table(path)
    return load_descriptor_table(path, rep)


def load_aligned_table(rep: str, path, ids):
    """Descriptor table subset to the measured compounds, in their order."""
    table = load_representation(rep, path)
    index = {cid: i for i, cid in enumerate(table.compound_ids)}
    missing = [cid for cid in ids if cid not in index]
    if missing:
        preview = ", ".join(missing[:5])
        raise SchemaError(
            f"{rep} descriptor table is missing {len(missing)} measured "
            f"compounds (first: {preview})"
        )
    return table.subset([index[cid] for cid in ids])


# ------------------------------------------------------------- protocol


def build_targets(cfg: RunConfig, table: MeasurementTable):
    """Assemble the target matrix: membrane logPe columns plus PCA scores.

    Returns (ids, Y, names, pca_model, scores); the PCA entries are None
    when no PCA target is requested.
    """
    ids, L = table.log_pe_matrix()
    names = cfg.target_names()
    pca_model = None
    scores = None
    if any(name.startswith("PCA_") for name in names):
        pca_model = pca_fit(L, cfg.pca_components)
        scores = np.full((len(ids), cfg.pca_components), np.nan)
        complete = ~np.isnan(L).any(axis=1)
        scores[complete] = pca_transform(pca_model, L[complete])
    columns = {}
    for j, membrane in enumerate(MEMBRANES):
        columns[f"{membrane}_LogPe"] = L[:, j]
    if scores is not None:
        for i in range(cfg.pca_components):
            columns[f"PCA_{i}"] = scores[:, i]
    Y = np.column_stack([columns[name] for name in names])
    return ids, Y, names, pca_model, scores


def build_plan(cfg: RunConfig, ids) -> CvPlan:
    if cfg.fold_file is not None:
        folds = load_fold_file(cfg.fold_file)
        if set(folds.mapping) != set(ids):
            raise SchemaError(
                "fold file compounds do not match the measured compounds"
            )
    else:
        seed = cfg.seed if cfg.fold_seed is None else cfg.fold_seed
        folds = assign_folds(ids, seed=seed)
    return CvPlan(folds=folds, seed=cfg.seed)


def sweep_arms(model_class: str, names, membrane_names):
    """(multitask, target subset) arms a model class runs in a sweep."""
    if model_class in SINGLE_TASK_ONLY:
        return [(False, list(names))]
    if model_class == "MTEN":
        return [(True, list(membrane_names))]
    arms = [(False, list(names))]
    if model_class in DUAL_ARM_CLASSES and len(membrane_names) >= 2:
        arms.append((True, list(membrane_names)))
    return arms


def run_sweeps(cfg: RunConfig, plan: CvPlan, tables: dict, Y, names, workers: int):
    """All configured (representation x class x arm) sweeps.

    A cell that raises is recorded as a failure and skipped; surviving
    cells contribute their trials.
    """
    trials: list = []
    failures: list = []
    membranes = [n for n in names if n.endswith("_LogPe")]
    col_of = {name: i for i, name in enumerate(names)}
    for rep in cfg.sweep.representations:
        if rep not in tables:
            continue
        table = tables[rep]
        for cls in cfg.sweep.model_classes:
            override = cfg.sweep.grids.get(cls)
            grid = [dict(p) for p in override] if override is not None else None
            for multitask, arm_targets in sweep_arms(cls, names, membranes):
                try:
                    got = run_grid(
                        plan,
                        table,
                        Y[:, [col_of[n] for n in arm_targets]],
                        arm_targets,
                        cls,
                        grid=grid,
                        multitask=multitask,
                        workers=workers,
                    )
                except Exception as exc:
                    failures.append(
                        {
                            "stage": "sweep",
                            "representation": rep,
                            "model_class": cls,
                            "multitask": multitask,
                            "error": f"{type(exc).__name__}: {exc}",
                        }
                    )
                    continue
                trials.extend(got)
    return trials, failures


def drop_dead_groups(trials, failures):
    """Remove tuning groups in which every run of every grid point failed,
    recording one failure entry per dropped group."""
    groups: dict = {}
    order: list = []
    for trial in trials:
        key = (trial.model_class, trial.representation, trial.target, trial.multitask)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(trial)
    alive: list = []
    for key in order:
        group = groups[key]
        if any(not math.isnan(t.mean_valid_r2) for t in group):
            alive.extend(group)
        else:
            cls, rep, target, multitask = key
            failures.append(
                {
                    "stage": "selection",
                    "representation": rep,
                    "model_class": cls,
                    "target": target,
                    "multitask": multitask,
                    "error": "every trial of the group failed",
                }
            )
    return alive


# -------------------------------------------------- trial serialization


def _run_to_jsonable(run: RunRecord) -> dict:
    return {
        "fold": run.fold,
        "repeat": run.repeat,
        "seed": run.seed,
        "train": run.train,
        "valid": run.valid,
        "eff_params": run.eff_params,
        "error": run.error,
    }


def _trial_to_jsonable(trial: TrialResult) -> dict:
    return {
        "representation": trial.representation,
        "model_class": trial.model_class,
        "target": trial.target,
        "trained_targets": list(trial.trained_targets),
        "multitask": trial.multitask,
        "grid_index": trial.grid_index,
        "hyperparameters": trial.hyperparameters,
        "runs": [_run_to_jsonable(r) for r in trial.runs],
    }


def write_trials_json(path, trials, config_hash: str) -> None:
    payload = {
        "config_sha256": config_hash,
        "trials": [_trial_to_jsonable(t) for t in trials],
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


def load_trials_json(path, config_hash: str):
    """Reload a trial dump; returns None when it belongs to another config."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("config_sha256") != config_hash:
        return None
    trials = []
    for t in payload["trials"]:
        runs = [
            RunRecord(
                fold=r["fold"],
                repeat=r["repeat"],
                seed=r["seed"],
                train=r["train"],
                valid=r["valid"],
                eff_params=r["eff_params"],
                error=r["error"],
            )
            for r in t["runs"]
        ]
        trials.append(
            TrialResult(
                representation=t["representation"],
                model_class=t["model_class"],
                target=t["target"],
                trained_targets=tuple(t["trained_targets"]),
                multitask=t["multitask"],
                grid_index=t["grid_index"],
                hyperparameters=t["hyperparameters"],
                runs=runs,
            )
        )
    return trials


# ------------------------------------------------------ shared command glue


def _overrides_from(args) -> dict:
    overrides = {
        "out_dir": getattr(args, "out", None),
        "seed": getattr(args, "seed", None),
        "workers": getattr(args, "workers", None),
        "selection_threshold": getattr(args, "threshold", None),
    }
    return overrides


def _config(args) -> RunConfig:
    return load_config(getattr(args, "config", None), _overrides_from(args))


def _require(value, message: str):
    if value is None:
        raise ConfigError(message)
    return value


def _sweep_context(cfg: RunConfig):
    """Everything a sweep-shaped command needs: plan, tables, targets."""
    if not cfg.sweep.representations:
        raise ConfigError("sweep.representations is empty")
    if not cfg.sweep.model_classes:
        raise ConfigError("sweep.model_classes is empty")
    measurements = _require(
        cfg.measurements, "inputs.measurements is required for this command"
    )
    table = load_measurements(measurements)
    ids, Y, names, pca_model, scores = build_targets(cfg, table)
    if not ids:
        raise SchemaError(f"{measurements}: no measurement rows")
    plan = build_plan(cfg, ids)
    tables = {}
    failures = []
    for rep in cfg.sweep.representations:
        try:
            tables[rep] = load_aligned_table(rep, cfg.descriptors[rep], ids)
        except PermlabError as exc:
            failures.append(
                {
                    "stage": "load",
                    "representation": rep,
                    "error": f"{type(exc).__name__}: {exc}",
                }
            )
    if not tables:
        raise SchemaError("every descriptor table failed to load")
    return table, ids, Y, names, pca_model, scores, plan, tables, failures


def _obtain_trials(cfg, sink, plan, tables, Y, names, reuse: bool):
    """Load trials.json when it matches this config, else run the sweeps."""
    trials = None
    path = sink.path("trials.json")
    if reuse and path.is_file():
        trials = load_trials_json(path, cfg.config_hash())
        if trials is not None:
            print(f"reusing {len(trials)} trials from {path}")
            return trials, []
    trials, failures = run_sweeps(cfg, plan, tables, Y, names, cfg.workers)
    return trials, failures


def _write_fold_csv(path, plan: CvPlan, ids) -> None:
    write_csv(path, ["compound_id", "fold"], [[cid, plan.folds.fold_of(cid)] for cid in ids])


def _print_best(report) -> None:
    for target, entry in sorted(report.best_per_target().items()):
        line = (
            f"  {target}: {entry.model_class}"
            f"{' multitask' if entry.multitask else ''}"
            f" on {entry.representation}, valid R2 {entry.mean_valid_r2:.4f}"
        )
        if entry.test_runs:
            line += f", test R2 {entry.test_aggregate('r2')[0]:.4f}"
        print(line)


# -------------------------------------------------------------- commands


def cmd_assay(args) -> int:
    cfg = _config(args)
    source = args.input or cfg.concentrations or cfg.measurements
    source = _require(
        source,
        "assay needs an input file (--in, inputs.concentrations or "
        "inputs.measurements)",
    )
    table = sniff_measurements(source, cfg.geometry)
    sink = OutputSink(cfg.out_dir)
    sink.emit("measurements.csv", write_measurements, table)
    sink.emit("measurements_mean.csv", write_mean_measurements, table)
    sink.write_manifest(cfg)
    print(
        f"assay: {len(table.records)} repeat rows, "
        f"{len(table.compound_ids())} compounds -> {sink.out_dir}"
    )
    return 0


def cmd_desalt(args) -> int:
    cfg = _config(args)
    source = _require(
        args.input or cfg.smiles, "desalt needs a SMILES file (--in or inputs.smiles)"
    )
    molecules = load_smiles_csv(source)
    rows = []
    n_failed = 0
    for cid, smi in molecules.items():
        try:
            stripped = canonical_smiles(desalt(parse_smiles(smi)))
            rows.append([cid, smi, stripped, ""])
        except PermlabError as exc:
            n_failed += 1
            rows.append([cid, smi, "", f"{type(exc).__name__}: {exc}"])
    sink = OutputSink(cfg.out_dir)
    sink.emit(
        "desalted.csv",
        write_csv,
        ["compound_id", "smiles", "desalted_smiles", "error"],
        rows,
    )
    sink.write_manifest(cfg)
    print(f"desalt: {len(rows) - n_failed} ok, {n_failed} failed -> {sink.out_dir}")
    return 0


def _pca_artifacts(sink, cfg, ids, pca_model, scores) -> None:
    names = cfg.pca_targets()
    rows = []
    for i, cid in enumerate(ids):
        row = [cid]
        for j in range(len(names)):
            value = scores[i, j]
            row.append(None if math.isnan(value) else value)
        rows.append(row)
    sink.emit("pca_scores.csv", write_csv, ["compound_id"] + names, rows)
    dropped = [ids[i] for i in pca_model.dropped_rows]
    payload = {
        "columns": [f"{m}_LogPe" for m in MEMBRANES],
        "explained_variance_ratio": pca_model.explained_variance_ratio.tolist(),
        "singular_values": pca_model.singular_values.tolist(),
        "column_means": pca_model.column_means.tolist(),
        "components": pca_model.components.tolist(),
        "n_samples": pca_model.n_samples,
        "dropped_compounds": dropped,
    }
    sink.emit_text("pca_model.json", json.dumps(payload, indent=2) + "\n")


def cmd_pca(args) -> int:
    cfg = _config(args)
    source = _require(
        args.input or cfg.measurements,
        "pca needs a measurement file (--in or inputs.measurements)",
    )
    table = sniff_measurements(source, cfg.geometry)
    ids, L = table.log_pe_matrix()
    pca_model = pca_fit(L, cfg.pca_components)
    scores = np.full((len(ids), cfg.pca_components), np.nan)
    complete = ~np.isnan(L).any(axis=1)
    scores[complete] = pca_transform(pca_model, L[complete])
    sink = OutputSink(cfg.out_dir)
    _pca_artifacts(sink, cfg, ids, pca_model, scores)
    sink.write_manifest(cfg)
    ratios = ", ".join(f"{r:.4f}" for r in pca_model.explained_variance_ratio)
    print(
        f"pca: {pca_model.n_samples} complete rows, "
        f"explained variance ratios {ratios} -> {sink.out_dir}"
    )
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    _, ids, Y, names, pca_model, scores, plan, tables, failures = _sweep_context(cfg)
    sink = OutputSink(cfg.out_dir)
    trials, sweep_failures = run_sweeps(cfg, plan, tables, Y, names, cfg.workers)
    failures.extend(sweep_failures)
    sink.emit("folds.csv", _write_fold_csv, plan, ids)
    sink.emit("trials.csv", write_trials_csv, trials)
    sink.emit("trials.json", write_trials_json, trials, cfg.config_hash())
    sink.write_manifest(cfg, failures)
    print(f"sweep: {len(trials)} trials, {len(failures)} failed cells -> {sink.out_dir}")
    if not trials:
        print("sweep: total failure, no trials produced", file=sys.stderr)
        return 1
    return 0


def cmd_select(args) -> int:
    cfg = _config(args)
    _, ids, Y, names, _, _, plan, tables, failures = _sweep_context(cfg)
    sink = OutputSink(cfg.out_dir)
    trials, sweep_failures = _obtain_trials(
        cfg, sink, plan, tables, Y, names, reuse=not args.fresh
    )
    failures.extend(sweep_failures)
    if not trials:
        sink.write_manifest(cfg, failures)
        print("select: no trials to choose from", file=sys.stderr)
        return 1
    trials = drop_dead_groups(trials, failures)
    report = select_tuned(trials)
    sink.emit("trials.csv", write_trials_csv, trials)
    sink.emit("trials.json", write_trials_json, trials, cfg.config_hash())
    sink.emit("selection.csv", write_selection_csv, report)
    sink.write_manifest(cfg, failures)
    print(f"select: {len(report.entries)} tuned models -> {sink.out_dir}")
    _print_best(report)
    return 0


def cmd_test(args) -> int:
    cfg = _config(args)
    _, ids, Y, names, _, _, plan, tables, failures = _sweep_context(cfg)
    sink = OutputSink(cfg.out_dir)
    trials, sweep_failures = _obtain_trials(
        cfg, sink, plan, tables, Y, names, reuse=not args.fresh
    )
    failures.extend(sweep_failures)
    if not trials:
        sink.write_manifest(cfg, failures)
        print("test: no trials to evaluate", file=sys.stderr)
        return 1
    trials = drop_dead_groups(trials, failures)
    report = select_tuned(trials)
    report = evaluate_test(
        plan,
        tables,
        Y,
        names,
        report,
        threshold=cfg.selection_threshold,
        workers=cfg.workers,
    )
    pairing = compare_single_vs_multi(trials)
    sink.emit("trials.csv", write_trials_csv, trials)
    sink.emit("trials.json", write_trials_json, trials, cfg.config_hash())
    sink.emit("selection.csv", write_selection_csv, report)
    sink.emit("pairing.csv", write_pairing_csv, pairing)
    sink.write_manifest(cfg, failures)
    n_tested = sum(1 for e in report.entries if e.selected_for_test)
    print(
        f"test: {n_tested} of {len(report.entries)} tuned models above "
        f"threshold {cfg.selection_threshold} -> {sink.out_dir}"
    )
    _print_best(report)
    if pairing.n_pairs:
        print(
            f"  multitask wins {pairing.n_multi_wins}/{pairing.n_pairs} "
            "matched comparisons"
        )
    return 0


def cmd_importance(args) -> int:
    cfg = _config(args)
    _, ids, Y, names, _, _, plan, tables, failures = _sweep_context(cfg)
    rep = args.representation
    if rep is None:
        rep = "percepta" if "percepta" in tables else cfg.sweep.representations[0]
    if rep not in tables:
        raise ConfigError(f"importance: representation {rep!r} is not available")
    sink = OutputSink(cfg.out_dir)
    trials, _ = _obtain_trials(cfg, sink, plan, tables, Y, names, reuse=not args.fresh)
    en_trials = [
        t
        for t in trials
        if t.model_class == "EN" and t.representation == rep and not t.multitask
    ]
    if not en_trials:
        override = cfg.sweep.grids.get("EN")
        grid = [dict(p) for p in override] if override is not None else None
        en_trials = run_grid(
            plan, tables[rep], Y, names, "EN", grid=grid, workers=cfg.workers
        )
    report = select_tuned(en_trials)
    matrix = feature_importance(plan, tables[rep], Y, names, report)
    sink.emit("importance.csv", write_importance_csv, matrix)
    sink.emit("importance.svg", write_importance_svg, matrix)
    sink.write_manifest(cfg, failures)
    print(
        f"importance: {matrix.matrix.shape[0]} rows x "
        f"{matrix.matrix.shape[1]} features on {rep} -> {sink.out_dir}"
    )
    return 0


def _property_columns(cfg: RunConfig):
    """Requested physchem columns as name -> {compound_id: value}."""
    requested = list(cfg.profiles.properties)
    if not requested:
        return None, None
    properties: dict = {}
    for rep in ("percepta", "rdkit"):
        path = cfg.descriptors.get(rep)
        if path is None:
            continue
        table = load_representation(rep, path)
        if table.matrix is None:
            continue
        index = {name: j for j, name in enumerate(table.feature_names)}
        for name in requested:
            if name in properties or name not in index:
                continue
            column = table.matrix[:, index[name]]
            properties[name] = {
                cid: float(column[i])
                for i, cid in enumerate(table.compound_ids)
                if not math.isnan(column[i])
            }
    return properties, requested


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text).strip("_") or "property"


def cmd_profiles(args) -> int:
    cfg = _config(args)
    source = _require(
        args.input or cfg.measurements,
        "profiles needs a measurement file (--in or inputs.measurements)",
    )
    table = sniff_measurements(source, cfg.geometry)
    mean_log_pe = table.mean_log_pe()
    if not mean_log_pe:
        raise SchemaError(f"{source}: no measurement rows")
    properties, requested = _property_columns(cfg)
    report = top_bottom_profiles(
        mean_log_pe,
        cfg.profiles.membranes,
        k=cfg.profiles.k,
        properties=properties,
        requested_properties=requested,
    )
    sink = OutputSink(cfg.out_dir)
    sink.emit("profiles.csv", write_profiles_csv, report, mean_log_pe)
    for prop in sorted({key[2] for key in report.property_summary}):
        sink.emit(f"profiles_{_safe_name(prop)}.svg", write_profiles_svg, report, prop)
    sink.write_manifest(cfg)
    sets = ", ".join(
        f"{m}:{len(report.high[m])}/{len(report.low[m])}" for m in report.membranes
    )
    print(f"profiles: high/low set sizes {sets} -> {sink.out_dir}")
    return 0


def cmd_scaffolds(args) -> int:
    cfg = _config(args)
    source = _require(
        args.input or cfg.smiles,
        "scaffolds needs a SMILES file (--in or inputs.smiles)",
    )
    molecules = load_smiles_csv(source)
    desalted: dict = {}
    failures: dict = {}
    for cid, smi in molecules.items():
        try:
            desalted[cid] = canonical_smiles(desalt(parse_smiles(smi)))
        except PermlabError as exc:
            failures[cid] = f"{type(exc).__name__}: {exc}"
    report = scaffold_report(desalted)
    report.failures.update(failures)
    sink = OutputSink(cfg.out_dir)
    sink.emit("scaffolds.csv", write_scaffolds_csv, report)
    sink.write_manifest(cfg)
    print(
        f"scaffolds: {report.n_unique} unique classes over "
        f"{len(desalted)} molecules, {len(report.failures)} failures "
        f"-> {sink.out_dir}"
    )
    return 0


def cmd_design(args) -> int:
    cfg = _config(args)
    rep = args.representation
    if rep is None:
        if not cfg.descriptors:
            raise ConfigError("design needs a descriptor table (inputs.descriptors)")
        rep = "percepta" if "percepta" in cfg.descriptors else sorted(cfg.descriptors)[0]
    if rep not in cfg.descriptors:
        raise ConfigError(f"design: no descriptor path configured for {rep!r}")
    if args.k < 1:
        raise ConfigError(f"design: k must be >= 1, got {args.k}")
    sink = OutputSink(cfg.out_dir)
    if args.method == "forward":
        if args.target is None:
            raise ConfigError("design --method forward needs --target")
        measurements = _require(
            cfg.measurements, "design --method forward needs inputs.measurements"
        )
        table = load_measurements(measurements)
        ids, Y, names, _, _ = build_targets(cfg, table)
        if args.target not in names:
            raise ConfigError(f"design: unknown target {args.target!r}")
        descriptor = load_aligned_table(rep, cfg.descriptors[rep], ids)
        y = Y[:, names.index(args.target)]
        keep = ~np.isnan(y)
        X = descriptor.dense()[keep]
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        X = (X - mu) / np.where(sd > 0, sd, 1.0)
        picked = forward_feature_select(X, y[keep], args.family, args.k)
        rows = [
            [rank, j, descriptor.feature_names[j] if descriptor.feature_names else ""]
            for rank, j in enumerate(picked)
        ]
        sink.emit(
            "design.csv", write_csv, ["rank", "feature_index", "feature_name"], rows
        )
        print(
            f"design: forward/{args.family} picked {len(picked)} features "
            f"of {rep} for {args.target} -> {sink.out_dir}"
        )
    else:
        descriptor = load_representation(rep, cfg.descriptors[rep])
        pool = CandidatePool(descriptor.dense())
        picked = d_optimal_select(pool, args.k, seed=cfg.seed)
        rows = [
            [rank, i, descriptor.compound_ids[i]] for rank, i in enumerate(picked)
        ]
        sink.emit(
            "design.csv", write_csv, ["rank", "row_index", "compound_id"], rows
        )
        print(
            f"design: d-optimal picked {len(picked)} of "
            f"{descriptor.n_compounds} compounds from {rep} -> {sink.out_dir}"
        )
    sink.write_manifest(cfg)
    return 0


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    table, ids, Y, names, pca_model, scores, plan, tables, failures = _sweep_context(cfg)
    sink = OutputSink(cfg.out_dir)
    sink.emit("measurements_mean.csv", write_mean_measurements, table)
    sink.emit("folds.csv", _write_fold_csv, plan, ids)
    if pca_model is not None:
        _pca_artifacts(sink, cfg, ids, pca_model, scores)
    print(
        f"pipeline: {len(ids)} compounds, {len(names)} targets, "
        f"{len(tables)} representations"
    )

    trials, sweep_failures = run_sweeps(cfg, plan, tables, Y, names, cfg.workers)
    failures.extend(sweep_failures)
    if not trials:
        sink.write_manifest(cfg, failures)
        print("pipeline: every sweep cell failed", file=sys.stderr)
        return 1
    trials = drop_dead_groups(trials, failures)
    sink.emit("trials.csv", write_trials_csv, trials)
    sink.emit("trials.json", write_trials_json, trials, cfg.config_hash())
    print(f"pipeline: {len(trials)} trials swept")

    report = select_tuned(trials)
    report = evaluate_test(
        plan,
        tables,
        Y,
        names,
        report,
        threshold=cfg.selection_threshold,
        workers=cfg.workers,
    )
    sink.emit("selection.csv", write_selection_csv, report)
    pairing = compare_single_vs_multi(trials)
    sink.emit("pairing.csv", write_pairing_csv, pairing)
    _print_best(report)
    if pairing.n_pairs:
        print(
            f"  multitask wins {pairing.n_multi_wins}/{pairing.n_pairs} "
            "matched comparisons"
        )

    importance_rep = "percepta" if "percepta" in tables else sorted(tables)[0]
    en_trials = [
        t
        for t in trials
        if t.model_class == "EN"
        and t.representation == importance_rep
        and not t.multitask
    ]
    if en_trials:
        try:
            matrix = feature_importance(
                plan, tables[importance_rep], Y, names, select_tuned(en_trials)
            )
            sink.emit("importance.csv", write_importance_csv, matrix)
            sink.emit("importance.svg", write_importance_svg, matrix)
        except PermlabError as exc:
            failures.append(
                {
                    "stage": "importance",
                    "representation": importance_rep,
                    "error": f"{type(exc).__name__}: {exc}",
                }
            )

    try:
        properties, requested = _property_columns(cfg)
        profile_report = top_bottom_profiles(
            table.mean_log_pe(),
            cfg.profiles.membranes,
            k=cfg.profiles.k,
            properties=properties,
            requested_properties=requested,
        )
        sink.emit("profiles.csv", write_profiles_csv, profile_report, table.mean_log_pe())
        for prop in sorted({key[2] for key in profile_report.property_summary}):
            sink.emit(
                f"profiles_{_safe_name(prop)}.svg",
                write_profiles_svg,
                profile_report,
                prop,
            )
    except PermlabError as exc:
        failures.append(
            {"stage": "profiles", "error": f"{type(exc).__name__}: {exc}"}
        )

    if cfg.smiles is not None:
        try:
            molecules = load_smiles_csv(cfg.smiles)
            desalted: dict = {}
            parse_failures: dict = {}
            for cid, smi in molecules.items():
                try:
                    desalted[cid] = canonical_smiles(desalt(parse_smiles(smi)))
                except PermlabError as exc:
                    parse_failures[cid] = f"{type(exc).__name__}: {exc}"
            scaffolds = scaffold_report(desalted)
            scaffolds.failures.update(parse_failures)
            sink.emit("scaffolds.csv", write_scaffolds_csv, scaffolds)
        except PermlabError as exc:
            failures.append(
                {"stage": "scaffolds", "error": f"{type(exc).__name__}: {exc}"}
            )

    sink.write_manifest(cfg, failures)
    print(
        f"pipeline: wrote {len(sink.hashes)} artifacts, "
        f"{len(failures)} failed cells -> {sink.out_dir}"
    )
    return 0


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", metavar="FILE", help="TOML run configuration")
    common.add_argument("--out", "-o", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, help="global seed override")
    common.add_argument("--workers", type=int, help="concurrent trial bound")

    parser = argparse.ArgumentParser(
        prog="permlab",
        description="Multitask membrane-permeability workbench",
    )
    parser.add_argument("--version", action="version", version=f"permlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "assay",
        parents=[common],
        help="derive retention/permeability tables from well measurements",
    )
    p.add_argument("--in", dest="input", metavar="FILE", help="input CSV")
    p.set_defaults(func=cmd_assay)

    p = sub.add_parser("desalt", parents=[common], help="strip salts, canonicalize SMILES")
    p.add_argument("--in", dest="input", metavar="FILE", help="SMILES CSV")
    p.set_defaults(func=cmd_desalt)

    p = sub.add_parser("pca", parents=[common], help="logPe principal components")
    p.add_argument("--in", dest="input", metavar="FILE", help="measurement CSV")
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("sweep", parents=[common], help="grid sweeps under the CV plan")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("select", parents=[common], help="pick tuned models per group")
    p.add_argument("--fresh", action="store_true", help="ignore cached trials.json")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("test", parents=[common], help="held-out evaluation of tuned models")
    p.add_argument("--fresh", action="store_true", help="ignore cached trials.json")
    p.add_argument("--threshold", type=float, help="validation R2 gate for testing")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("importance", parents=[common], help="linear coefficient heatmap")
    p.add_argument("--fresh", action="store_true", help="ignore cached trials.json")
    p.add_argument(
        "--representation", choices=KNOWN_REPRESENTATIONS, help="descriptor set to use"
    )
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("profiles", parents=[common], help="top/bottom penetrator profiles")
    p.add_argument("--in", dest="input", metavar="FILE", help="measurement CSV")
    p.set_defaults(func=cmd_profiles)

    p = sub.add_parser("scaffolds", parents=[common], help="scaffold landscape report")
    p.add_argument("--in", dest="input", metavar="FILE", help="SMILES CSV")
    p.set_defaults(func=cmd_scaffolds)

    p = sub.add_parser("design", parents=[common], help="feature or compound selection")
    p.add_argument(
        "--method", choices=("forward", "doptimal"), required=True, help="selection mode"
    )
    p.add_argument("--k", type=int, required=True, help="number of picks")
    p.add_argument(
        "--representation", choices=KNOWN_REPRESENTATIONS, help="descriptor set to use"
    )
    p.add_argument("--family", choices=MODEL_FAMILIES, default="OLS")
    p.add_argument("--target", help="target column for forward selection")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("pipeline", parents=[common], help="full workflow in one run")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, TableParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PermlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
