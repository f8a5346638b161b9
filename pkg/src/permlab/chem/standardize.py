"""Cleanup, salt stripping, fragment choice, and charge neutralization."""

from __future__ import annotations

from dataclasses import replace
from functools import lru_cache
from importlib import resources

from ..errors import EmptyAfterDesaltError
from .canon import canonical_smiles
from .mol import AROMATIC, ATOMIC_WEIGHTS, Molecule
from .smiles import parse_smiles


def cleanup(m: Molecule) -> Molecule:
    """Aromaticity sanitation: aromatic markings must live on rings.

    Aromatic bonds off rings demote to single; an atom keeps its aromatic
    flag only while it retains an aromatic ring bond. Demotions cascade
    until stable. Hydrogen counts of organic-subset atoms follow
    automatically since they are valence-derived.
    """
    atoms = list(m.atoms)
    orders = [b.order for b in m.bonds]
    ring = m.ring_bonds()
    for k, bond in enumerate(m.bonds):
        if orders[k] == AROMATIC and k not in ring:
            orders[k] = 1
    changed = True
    while changed:
        changed = False
        for i, a in enumerate(atoms):
            if not a.aromatic:
                continue
            has_aromatic_bond = any(
                orders[k] == AROMATIC for k in m.bond_indices(i)
            )
            if not has_aromatic_bond:
                atoms[i] = replace(a, aromatic=False)
                changed = True
        for k, bond in enumerate(m.bonds):
            if orders[k] == AROMATIC and not (
                atoms[bond.a].aromatic and atoms[bond.b].aromatic
            ):
                orders[k] = 1
                changed = True
    bonds = [replace(b, order=o) for b, o in zip(m.bonds, orders)]
    return Molecule(atoms, bonds)


class SaltList:
    """Known counter-ion fragments, matched against parsed components.

    Single-element entries match any one-heavy-atom component of that
    element whatever its charge or hydrogen count; multi-atom entries
    match by canonical serialization of the raw component.
    """

    def __init__(self, entries):
        self.entries = tuple(entries)
        if not self.entries:
            raise ValueError("salt list must be non-empty")
        self.single_elements = set()
        self.canonical_forms = set()
        for entry in self.entries:
            if entry in ATOMIC_WEIGHTS:
                self.single_elements.add(entry)
            else:
                self.canonical_forms.add(canonical_smiles(parse_smiles(entry)))

    def __len__(self):
        return len(self.entries)

    def matches(self, component: Molecule) -> bool:
        if component.heavy_atom_count() == 1:
            return component.atoms[0].element in self.single_elements
        return canonical_smiles(component) in self.canonical_forms


@lru_cache(maxsize=1)
def default_salt_list() -> SaltList:
    text = (
        resources.files("permlab.chem")
        .joinpath("salts.txt")
        .read_text(encoding="utf-8")
    )
    return SaltList([line.strip() for line in text.splitlines() if line.strip()])


def most_significant_fragment(fragments) -> Molecule:
    """Most heavy atoms, then larger weight, then smallest serialization."""
    def key(frag: Molecule):
        return (
            -frag.heavy_atom_count(),
            -frag.molecular_weight(),
            canonical_smiles(frag),
        )

    return min(fragments, key=key)


def neutralize(m: Molecule) -> Molecule:
    """Proton-shift uncharging.

    Positive atoms give up hydrogens down to charge zero or zero
    hydrogens, whichever first (quaternary nitrogens have none to give
    and stay put). Negative O, N, and S gain hydrogens to zero charge.
    """
    atoms = list(m.atoms)
    for i, a in enumerate(atoms):
        if a.charge > 0:
            h = m.h_count(i)
            take = min(a.charge, h)
            if take > 0:
                atoms[i] = replace(a, charge=a.charge - take, explicit_h=h - take)
        elif a.charge < 0 and a.element in ("O", "N", "S"):
            h = m.h_count(i)
            atoms[i] = replace(a, charge=0, explicit_h=h - a.charge)
    return Molecule(atoms, m.bonds)


def desalt(m: Molecule, salts: SaltList | None = None) -> Molecule:
    """Strip counter-ions and standardize to one neutral fragment.

    Order: cleanup, drop salt-matching components, keep the most
    significant remaining fragment, erase stereo markers, neutralize,
    final cleanup. Raises EmptyAfterDesaltError when every component
    matched the salt list.
    """
    if salts is None:
        salts = default_salt_list()
    m = cleanup(m)
    components = [m.subgraph(comp) for comp in m.components()]
    kept = [c for c in components if not salts.matches(c)]
    if not kept:
        raise EmptyAfterDesaltError(
            "all components matched the salt list; nothing to keep"
        )
    mol = kept[0] if len(kept) == 1 else most_significant_fragment(kept)
    mol = mol.without_stereo()
    mol = neutralize(mol)
    return cleanup(mol)
