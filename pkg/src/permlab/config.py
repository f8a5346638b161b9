"""Run configuration: one TOML file drives every subcommand.

Command-line flags override file values; the PERMLAB_OUT environment
variable overrides the output directory (and nothing else). Validation
happens before any compute so a bad model class or a missing input path
fails fast with a config error.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .assay import MEMBRANES, AssayGeometry
from .errors import ConfigError
from .models import MODEL_CLASSES

KNOWN_REPRESENTATIONS = ("percepta", "rdkit", "cddd", "molbert", "ecfp")
OUT_DIR_ENV = "PERMLAB_OUT"
DEFAULT_PCA_COMPONENTS = 3
DEFAULT_PROFILE_MEMBRANES = ("H", "BBB", "DOD")

_GEOMETRY_KEYS = (
    "filter_area",
    "donor_volume",
    "acceptor_volume",
    "incubation_time",
    "steady_state_lag",
)


@dataclass(frozen=True)
class SweepConfig:
    representations: tuple = ()
    model_classes: tuple = ()
    targets: tuple | str = "all"
    # model class -> tuple of hyperparameter dicts replacing the default grid
    grids: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ProfilesConfig:
    membranes: tuple = DEFAULT_PROFILE_MEMBRANES
    k: int = 10
    properties: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out_dir: Path = Path("permlab_out")
    workers: int = 1
    selection_threshold: float = 0.5
    pca_components: int = DEFAULT_PCA_COMPONENTS
    measurements: Path | None = None
    concentrations: Path | None = None
    smiles: Path | None = None
    descriptors: dict = field(default_factory=dict)
    geometry: AssayGeometry = field(default_factory=AssayGeometry)
    fold_seed: int | None = None
    fold_file: Path | None = None
    sweep: SweepConfig = field(default_factory=SweepConfig)
    profiles: ProfilesConfig = field(default_factory=ProfilesConfig)

    def membrane_targets(self) -> list[str]:
        return [f"{m}_LogPe" for m in MEMBRANES]

    def pca_targets(self) -> list[str]:
        return [f"PCA_{i}" for i in range(self.pca_components)]

    def target_names(self) -> list[str]:
        """Requested target columns in canonical order."""
        candidates = self.membrane_targets() + self.pca_targets()
        if self.sweep.targets == "all":
            return candidates
        return [name for name in candidates if name in self.sweep.targets]

    def resolved(self) -> dict:
        """Computation-defining settings as a JSON-able mapping.

        Excludes out_dir and workers: neither may influence any output
        byte, so reruns that differ only there hash identically.
        """
        return {
            "seed": self.seed,
            "selection_threshold": self.selection_threshold,
            "pca_components": self.pca_components,
            "measurements": _path_str(self.measurements),
            "concentrations": _path_str(self.concentrations),
            "smiles": _path_str(self.smiles),
            "descriptors": {k: _path_str(v) for k, v in sorted(self.descriptors.items())},
            "geometry": {k: getattr(self.geometry, k) for k in _GEOMETRY_KEYS},
            "fold_seed": self.fold_seed,
            "fold_file": _path_str(self.fold_file),
            "sweep": {
                "representations": list(self.sweep.representations),
                "model_classes": list(self.sweep.model_classes),
                "targets": (
                    "all" if self.sweep.targets == "all" else list(self.sweep.targets)
                ),
                "grids": {k: list(v) for k, v in sorted(self.sweep.grids.items())},
            },
            "profiles": {
                "membranes": list(self.profiles.membranes),
                "k": self.profiles.k,
                "properties": list(self.profiles.properties),
            },
        }

    def config_hash(self) -> str:
        text = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _path_str(p) -> str | None:
    return None if p is None else str(p)


def _expect(table: dict, key: str, kinds, where: str, default=None):
    if key not in table:
        return default
    value = table[key]
    if not isinstance(value, kinds):
        raise ConfigError(
            f"{where}.{key}: expected {_kind_names(kinds)}, got {type(value).__name__}"
        )
    return value


def _kind_names(kinds) -> str:
    if not isinstance(kinds, tuple):
        kinds = (kinds,)
    return " or ".join(k.__name__ for k in kinds)


def _string_list(value, where: str) -> tuple:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where}: expected a list of strings")
    return tuple(value)


def _check_seed(value: int, where: str) -> int:
    if not (0 <= value < 2**64):
        raise ConfigError(f"{where}: seed must fit in 64 bits, got {value}")
    return int(value)


def _existing_path(text: str, where: str) -> Path:
    p = Path(text)
    if not p.is_file():
        raise ConfigError(f"{where}: file not found: {text}")
    return p


def _parse_grid_override(points, model_class: str) -> tuple:
    where = f"sweep.grids.{model_class}"
    if not isinstance(points, list) or not points:
        raise ConfigError(f"{where}: expected a non-empty array of tables")
    out = []
    for i, point in enumerate(points):
        if not isinstance(point, dict):
            raise ConfigError(f"{where}[{i}]: expected a table of hyperparameters")
        for key, value in point.items():
            scalar = isinstance(value, (int, float, str, bool))
            int_list = isinstance(value, list) and all(
                isinstance(v, int) for v in value
            )
            if not (scalar or int_list):
                raise ConfigError(
                    f"{where}[{i}].{key}: hyperparameter values must be "
                    "scalars or integer lists"
                )
        out.append(dict(point))
    return tuple(out)


def load_config(path=None, overrides: dict | None = None, env: dict | None = None) -> RunConfig:
    """Read, override, and validate a run configuration.

    ``path`` may be None for flag-only invocations. ``overrides`` carries
    already-typed values from command-line flags (None entries ignored);
    ``env`` defaults to os.environ and is consulted only for the output
    directory.
    """
    raw: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(p, "rb") as fh:
                raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    env = os.environ if env is None else env

    seed = _check_seed(int(_expect(raw, "seed", int, "config", 0)), "config.seed")
    out_dir = _expect(raw, "out_dir", str, "config", "permlab_out")
    workers = _expect(raw, "workers", int, "config", 1)
    threshold = float(_expect(raw, "selection_threshold", (int, float), "config", 0.5))
    pca_components = _expect(raw, "pca_components", int, "config", DEFAULT_PCA_COMPONENTS)

    inputs = _expect(raw, "inputs", dict, "config", {})
    measurements = _expect(inputs, "measurements", str, "inputs")
    concentrations = _expect(inputs, "concentrations", str, "inputs")
    smiles = _expect(inputs, "smiles", str, "inputs")
    descriptor_paths = _expect(inputs, "descriptors", dict, "inputs", {})

    assay_raw = _expect(raw, "assay", dict, "config", {})
    folds_raw = _expect(raw, "folds", dict, "config", {})
    sweep_raw = _expect(raw, "sweep", dict, "config", {})
    profiles_raw = _expect(raw, "profiles", dict, "config", {})

    # precedence for the output directory: flag > environment > file
    if "out_dir" in overrides:
        out_dir = overrides["out_dir"]
    elif env.get(OUT_DIR_ENV):
        out_dir = env[OUT_DIR_ENV]
    seed = overrides.get("seed", seed)
    seed = _check_seed(int(seed), "seed")
    workers = int(overrides.get("workers", workers))
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    threshold = float(overrides.get("selection_threshold", threshold))
    pca_components = int(overrides.get("pca_components", pca_components))
    if not (1 <= pca_components <= len(MEMBRANES)):
        raise ConfigError(
            f"pca_components must lie in [1, {len(MEMBRANES)}], got {pca_components}"
        )
    measurements = overrides.get("measurements", measurements)
    concentrations = overrides.get("concentrations", concentrations)
    smiles = overrides.get("smiles", smiles)

    for key in assay_raw:
        if key not in _GEOMETRY_KEYS:
            raise ConfigError(f"assay.{key}: unknown geometry field")
    geometry_kwargs = {
        k: float(_expect(assay_raw, k, (int, float), "assay", getattr(AssayGeometry, k)))
        for k in _GEOMETRY_KEYS
    }
    try:
        geometry = AssayGeometry(**geometry_kwargs)
    except ValueError as exc:
        raise ConfigError(f"assay: {exc}") from exc

    fold_seed = _expect(folds_raw, "seed", int, "folds")
    if fold_seed is not None:
        fold_seed = _check_seed(fold_seed, "folds.seed")
    fold_file = _expect(folds_raw, "file", str, "folds")
    if fold_seed is not None and fold_file is not None:
        raise ConfigError("folds: give either a seed or a file, not both")

    representations = _string_list(
        _expect(sweep_raw, "representations", list, "sweep", []),
        "sweep.representations",
    )
    model_classes = _string_list(
        _expect(sweep_raw, "model_classes", list, "sweep", []),
        "sweep.model_classes",
    )
    if "model_classes" in overrides:
        model_classes = tuple(overrides["model_classes"])
    if "representations" in overrides:
        representations = tuple(overrides["representations"])
    for cls in model_classes:
        if cls not in MODEL_CLASSES:
            raise ConfigError(
                f"sweep.model_classes: unknown model class {cls!r}; "
                f"known: {', '.join(sorted(MODEL_CLASSES))}"
            )
    for rep in representations:
        if rep not in KNOWN_REPRESENTATIONS:
            raise ConfigError(
                f"sweep.representations: unknown representation {rep!r}; "
                f"known: {', '.join(KNOWN_REPRESENTATIONS)}"
            )

    targets_raw = sweep_raw.get("targets", "all")
    if targets_raw == "all":
        targets: tuple | str = "all"
    else:
        targets = _string_list(targets_raw, "sweep.targets")
        valid = {f"{m}_LogPe" for m in MEMBRANES}
        valid.update(f"PCA_{i}" for i in range(pca_components))
        for name in targets:
            if name not in valid:
                raise ConfigError(
                    f"sweep.targets: unknown target {name!r}; valid names are "
                    "<membrane>_LogPe and PCA_<i>"
                )

    grids_raw = _expect(sweep_raw, "grids", dict, "sweep", {})
    grids = {}
    for cls, points in grids_raw.items():
        if cls not in MODEL_CLASSES:
            raise ConfigError(f"sweep.grids: unknown model class {cls!r}")
        grids[cls] = _parse_grid_override(points, cls)

    profile_membranes = _string_list(
        _expect(profiles_raw, "membranes", list, "profiles", list(DEFAULT_PROFILE_MEMBRANES)),
        "profiles.membranes",
    )
    for m in profile_membranes:
        if m not in MEMBRANES:
            raise ConfigError(f"profiles.membranes: unknown membrane {m!r}")
    profile_k = _expect(profiles_raw, "k", int, "profiles", 10)
    if profile_k < 1:
        raise ConfigError(f"profiles.k must be >= 1, got {profile_k}")
    profile_properties = _string_list(
        _expect(profiles_raw, "properties", list, "profiles", []),
        "profiles.properties",
    )

    # referenced inputs must exist before any compute touches them
    if measurements is not None:
        measurements = _existing_path(str(measurements), "inputs.measurements")
    if concentrations is not None:
        concentrations = _existing_path(str(concentrations), "inputs.concentrations")
    if smiles is not None:
        smiles = _existing_path(str(smiles), "inputs.smiles")
    descriptors = {}
    for rep, text in descriptor_paths.items():
        if rep not in KNOWN_REPRESENTATIONS:
            raise ConfigError(f"inputs.descriptors: unknown representation {rep!r}")
        if not isinstance(text, str):
            raise ConfigError(f"inputs.descriptors.{rep}: expected a path string")
        descriptors[rep] = _existing_path(text, f"inputs.descriptors.{rep}")
    if fold_file is not None:
        fold_file = _existing_path(fold_file, "folds.file")
    for rep in representations:
        if rep not in descriptors:
            raise ConfigError(
                f"sweep.representations: {rep!r} has no inputs.descriptors entry"
            )

    return RunConfig(
        seed=seed,
        out_dir=Path(out_dir),
        workers=workers,
        selection_threshold=threshold,
        pca_components=pca_components,
        measurements=measurements,
        concentrations=concentrations,
        smiles=smiles,
        descriptors=descriptors,
        geometry=geometry,
        fold_seed=fold_seed,
        fold_file=fold_file,
        sweep=SweepConfig(
            representations=representations,
            model_classes=model_classes,
            targets=targets,
            grids=grids,
        ),
        profiles=ProfilesConfig(
            membranes=profile_membranes,
            k=profile_k,
            properties=profile_properties,
        ),
    )
