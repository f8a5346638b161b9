"""Sparse binary fingerprints: folding, Tanimoto, MaxMin picking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, KTooLargeError, WidthMismatchError


@dataclass(frozen=True)
class Fingerprint:
    active_bits: tuple
    width: int | None = None

    def __post_init__(self):
        bits = tuple(sorted(set(int(b) for b in self.active_bits)))
        object.__setattr__(self, "active_bits", bits)
        if bits and bits[0] < 0:
            raise DegenerateInputError("negative bit index")
        if self.width is not None:
            if self.width <= 0:
                raise DegenerateInputError("width must be positive")
            if bits and bits[-1] >= self.width:
                raise DegenerateInputError(
                    f"bit {bits[-1]} outside width {self.width}"
                )

    def __len__(self):
        return len(self.active_bits)


def fold_fingerprint(fp: Fingerprint, width: int) -> Fingerprint:
    """Collapse bits modulo width; collisions deduplicate."""
    if width <= 0:
        raise DegenerateInputError("fold width must be positive")
    return Fingerprint(tuple(b % width for b in fp.active_bits), width)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|intersection| / |union|; two empty fingerprints count as identical."""
    if a.width != b.width:
        raise WidthMismatchError(f"widths differ: {a.width} vs {b.width}")
    sa, sb = set(a.active_bits), set(b.active_bits)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def maxmin_diversity_pick(fps, k: int, seed: int) -> list:
    """Greedy farthest-first selection under Tanimoto distance.

    The first pick is drawn uniformly from the seeded generator; every
    later pick maximizes the minimum distance (1 - similarity) to the
    picked set, ties going to the lowest index.
    """
    n = len(fps)
    if k > n:
        raise KTooLargeError(f"k={k} exceeds {n} fingerprints")
    if k <= 0:
        return []
    rng = np.random.default_rng(seed)
    first = int(rng.integers(n))
    picked = [first]
    chosen = {first}
    dmin = [1.0 - tanimoto(fps[i], fps[first]) for i in range(n)]
    while len(picked) < k:
        best = -1
        best_d = -1.0
        for i in range(n):
            if i in chosen:
                continue
            if dmin[i] > best_d:
                best = i
                best_d = dmin[i]
        picked.append(best)
        chosen.add(best)
        for i in range(n):
            if i not in chosen:
                d = 1.0 - tanimoto(fps[i], fps[best])
                if d < dmin[i]:
                    dmin[i] = d
    return picked
