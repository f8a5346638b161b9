"""Seeded synthetic dataset with a planted linear ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..assay import MEMBRANES
from ..errors import DegenerateInputError
from .tables import DescriptorTable, FoldAssignment


def assign_folds(compound_ids, n_folds: int = 5, seed: int = 0) -> FoldAssignment:
    """Seeded uniform shuffle followed by round-robin fold assignment."""
    ids = list(compound_ids)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    mapping = {ids[idx]: i % n_folds for i, idx in enumerate(order)}
    # dict order mirrors the input id order for stable serialization
    return FoldAssignment({cid: mapping[cid] for cid in ids}, n_folds)


@dataclass
class SynthDataset:
    """Planted-truth dataset; iterates as (table, targets, folds)."""

    table: DescriptorTable
    targets: np.ndarray
    folds: FoldAssignment
    weights: np.ndarray
    target_names: list

    def __iter__(self):
        return iter((self.table, self.targets, self.folds))


def synth_dataset(
    seed: int,
    n_compounds: int,
    n_features: int,
    n_targets: int,
    noise_sd: float,
) -> SynthDataset:
    """Standard-normal features with correlated linear targets.

    Each target is a scaled copy of a shared weight vector plus a small
    per-target perturbation, so the targets are strongly correlated. With
    noise_sd=0 ordinary least squares on the full data recovers the
    planted weights exactly.
    """
    if n_compounds <= 0 or n_features <= 0 or n_targets <= 0:
        raise DegenerateInputError("all synth dataset counts must be positive")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_compounds, n_features))
    shared = rng.standard_normal(n_features)
    scales = rng.uniform(0.5, 1.5, size=n_targets)
    deltas = 0.3 * rng.standard_normal((n_features, n_targets))
    W = shared[:, None] * scales[None, :] + deltas
    Y = X @ W
    if noise_sd > 0:
        Y = Y + noise_sd * rng.standard_normal(Y.shape)

    ids = [f"C{i + 1:04d}" for i in range(n_compounds)]
    folds = assign_folds(ids, n_folds=5, seed=seed)
    table = DescriptorTable(
        representation="synth",
        compound_ids=ids,
        feature_names=[f"f{j}" for j in range(n_features)],
        matrix=X,
        folds=[folds.fold_of(cid) for cid in ids],
    )
    if n_targets <= len(MEMBRANES):
        names = [f"{m}_LogPe" for m in MEMBRANES[:n_targets]]
    else:
        names = [f"t{j}" for j in range(n_targets)]
    return SynthDataset(table=table, targets=Y, folds=folds, weights=W, target_names=names)
