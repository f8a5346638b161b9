"""Cross-validation plan: fold layout, repeat policy, trial seeding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data.synth import assign_folds
from ..data.tables import FoldAssignment
from ..errors import TooFewCompoundsError

REPEATS = {"MLP": 5, "RFR": 3}

# stable per-class component for seed derivation
CLASS_IDS = {
    "DTR": 0,
    "RFR": 1,
    "EN": 2,
    "MTEN": 3,
    "BayesRidge": 4,
    "PLS": 5,
    "SVR": 6,
    "GBT": 7,
    "MLP": 8,
}


def split_folds(compound_ids, seed: int) -> FoldAssignment:
    """Seeded shuffle + round-robin into 5 folds (sizes within 1)."""
    ids = list(compound_ids)
    if len(ids) < 5:
        raise TooFewCompoundsError(
            f"need at least 5 compounds for a 5-fold split, got {len(ids)}"
        )
    return assign_folds(ids, n_folds=5, seed=seed)


def trial_seed(
    plan_seed: int, model_class: str, grid_index: int, fold: int, repeat: int
) -> int:
    entropy = (plan_seed, CLASS_IDS[model_class], grid_index, fold, repeat)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint32)[0])


@dataclass(frozen=True)
class CvPlan:
    """Fold 0 is the held-out test set; folds 1-4 rotate as validation."""

    folds: FoldAssignment
    seed: int
    test_fold: int = 0
    cv_folds: tuple = (1, 2, 3, 4)

    def __post_init__(self):
        if self.test_fold in self.cv_folds:
            raise ValueError("test fold cannot also be a CV fold")

    def repeats_for(self, model_class: str) -> int:
        return REPEATS.get(model_class, 1)

    def cv_splits(self) -> list:
        """(validation fold, training folds) pairs: 3 train + 1 validation."""
        return [
            (v, tuple(f for f in self.cv_folds if f != v)) for v in self.cv_folds
        ]

    def run_seed(self, model_class: str, grid_index: int, fold: int, repeat: int) -> int:
        return trial_seed(self.seed, model_class, grid_index, fold, repeat)
