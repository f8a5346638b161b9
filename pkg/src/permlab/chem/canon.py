"""Canonical atom ranking and serialization.

Ranks come from iterative neighborhood-invariant refinement. Residual
ties are resolved by individualizing each tied candidate in turn and
keeping the lexicographically smallest serialization, which makes the
output invariant to atom storage order. The form is internal to this
tool; it makes no claim of matching any other toolkit's canonical SMILES.
"""

from __future__ import annotations

from .mol import AROMATIC, Molecule
from .smiles import serialize

# Individualization budget before degrading to first-candidate-only
# exploration. Drug-sized molecules stay far below this.
_BRANCH_BUDGET = 4000

_BOND_KEY = {1: 1, 2: 2, 3: 3, AROMATIC: 4}


def _dense_rank(keys) -> list:
    order = sorted(set(keys))
    index = {key: r for r, key in enumerate(order)}
    return [index[key] for key in keys]


def initial_ranks(m: Molecule) -> list:
    keys = []
    for i, a in enumerate(m.atoms):
        keys.append(
            (
                a.element,
                a.charge,
                m.h_count(i),
                int(a.aromatic),
                a.isotope or 0,
                m.degree(i),
            )
        )
    return _dense_rank(keys)


def refine(m: Molecule, ranks) -> list:
    """Split rank classes by sorted neighbor (bond, rank) multisets."""
    while True:
        keys = []
        for i in range(len(m.atoms)):
            nbr = sorted(
                (_BOND_KEY[m.bonds[k].order], ranks[m.bonds[k].other(i)])
                for k in m.bond_indices(i)
            )
            keys.append((ranks[i], tuple(nbr)))
        new_ranks = _dense_rank(keys)
        if new_ranks == ranks:
            return ranks
        ranks = new_ranks


def canonical_ranks(m: Molecule) -> list:
    """Discrete ranks for one arbitrary-but-deterministic canonical branch.

    Useful when only a consistent ordering is needed; canonical_smiles
    explores all branches and should be used for string matching.
    """
    ranks = refine(m, initial_ranks(m))
    while len(set(ranks)) < len(ranks):
        ranks = refine(m, _individualize_first(ranks))
    return ranks


def _tied_class(ranks) -> list:
    counts: dict[int, list] = {}
    for i, r in enumerate(ranks):
        counts.setdefault(r, []).append(i)
    tied = [(r, members) for r, members in counts.items() if len(members) > 1]
    if not tied:
        return []
    return min(tied)[1]


def _individualize(ranks, atom: int) -> list:
    doubled = [r * 2 for r in ranks]
    doubled[atom] -= 1
    return _dense_rank(doubled)


def _individualize_first(ranks) -> list:
    members = _tied_class(ranks)
    return _individualize(ranks, members[0])


def canonical_smiles(m: Molecule) -> str:
    """Serialization invariant to atom reindexing of the same graph."""
    ranks = refine(m, initial_ranks(m))
    budget = [_BRANCH_BUDGET]
    return _search(m, ranks, budget)


def _search(m: Molecule, ranks, budget) -> str:
    members = _tied_class(ranks)
    if not members:
        return serialize(m, ranks)
    if budget[0] <= 0:
        # symmetric beyond budget: deterministic but order-sensitive path
        candidates = members[:1]
    else:
        candidates = members
    best = None
    for atom in candidates:
        budget[0] -= 1
        branch = refine(m, _individualize(ranks, atom))
        text = _search(m, branch, budget)
        if best is None or text < best:
            best = text
    return best


def write_smiles(m: Molecule) -> str:
    return canonical_smiles(m)
