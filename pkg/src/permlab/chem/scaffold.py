"""Generic ring-and-linker skeleton extraction."""

from __future__ import annotations

from dataclasses import replace

from ..errors import AcyclicError
from .mol import Molecule


def generic_murcko_scaffold(m: Molecule) -> Molecule:
    """Ring systems plus linkers, flattened to plain single-bonded carbon.

    Terminal atoms that sit on no ring are pruned repeatedly, so side
    chains disappear leaf by leaf while atoms on rings or on paths
    between rings survive. Every remaining atom then becomes a neutral,
    nonaromatic carbon and every bond becomes single order.
    """
    if not m.ring_bonds():
        raise AcyclicError("molecule has no ring, scaffold undefined")
    keep = set(range(len(m.atoms)))
    changed = True
    while changed:
        changed = False
        for i in sorted(keep):
            if m.in_ring(i):
                continue
            degree = sum(1 for j in m.neighbors(i) if j in keep)
            if degree <= 1:
                keep.discard(i)
                changed = True
    skeleton = m.subgraph(sorted(keep))
    atoms = [
        replace(
            a,
            element="C",
            charge=0,
            isotope=None,
            aromatic=False,
            explicit_h=None,
            chiral=None,
        )
        for a in skeleton.atoms
    ]
    bonds = [replace(b, order=1, direction=None) for b in skeleton.bonds]
    return Molecule(atoms, bonds)
