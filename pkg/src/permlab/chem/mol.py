"""Molecular graph model: atoms, bonds, rings, weights, components."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import DegenerateInputError

AROMATIC = "ar"

# Organic-subset default valences, tried in order until one covers the
# bonded electron count.
DEFAULT_VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ORGANIC_SUBSET = set(DEFAULT_VALENCES)
AROMATIC_ELEMENTS = {"B", "C", "N", "O", "P", "S", "Se", "As"}

# Standard atomic weights (conventional values).
ATOMIC_WEIGHTS = {
    "H": 1.008,
    "He": 4.0026,
    "Li": 6.94,
    "Be": 9.0122,
    "B": 10.81,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "Ne": 20.180,
    "Na": 22.990,
    "Mg": 24.305,
    "Al": 26.982,
    "Si": 28.085,
    "P": 30.974,
    "S": 32.06,
    "Cl": 35.45,
    "Ar": 39.95,
    "K": 39.098,
    "Ca": 40.078,
    "Sc": 44.956,
    "Ti": 47.867,
    "V": 50.942,
    "Cr": 51.996,
    "Mn": 54.938,
    "Fe": 55.845,
    "Co": 58.933,
    "Ni": 58.693,
    "Cu": 63.546,
    "Zn": 65.38,
    "Ga": 69.723,
    "Ge": 72.630,
    "As": 74.922,
    "Se": 78.971,
    "Br": 79.904,
    "Kr": 83.798,
    "Rb": 85.468,
    "Sr": 87.62,
    "Y": 88.906,
    "Zr": 91.224,
    "Nb": 92.906,
    "Mo": 95.95,
    "Ru": 101.07,
    "Rh": 102.91,
    "Pd": 106.42,
    "Ag": 107.87,
    "Cd": 112.41,
    "In": 114.82,
    "Sn": 118.71,
    "Sb": 121.76,
    "Te": 127.60,
    "I": 126.90,
    "Xe": 131.29,
    "Cs": 132.91,
    "Ba": 137.33,
    "La": 138.91,
    "W": 183.84,
    "Re": 186.21,
    "Os": 190.23,
    "Ir": 192.22,
    "Pt": 195.08,
    "Au": 196.97,
    "Hg": 200.59,
    "Tl": 204.38,
    "Pb": 207.2,
    "Bi": 208.98,
}


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    isotope: int | None = None
    aromatic: bool = False
    explicit_h: int | None = None  # None: derive from default valence
    chiral: str | None = None  # "@" or "@@", parsed then discardable


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: object = 1  # 1 | 2 | 3 | AROMATIC
    direction: str | None = None  # "/" or "\\", parsed then discardable

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


def _bond_electrons(order) -> int:
    # Aromatic bonds count as one shared pair toward the valence budget;
    # the delocalized contribution is added once per aromatic atom.
    return 1 if order == AROMATIC else order


class Molecule:
    """Immutable-by-convention molecular graph."""

    def __init__(self, atoms, bonds):
        self.atoms = tuple(atoms)
        self.bonds = tuple(bonds)
        n = len(self.atoms)
        adj = [[] for _ in range(n)]
        for k, bond in enumerate(self.bonds):
            if bond.a == bond.b:
                raise DegenerateInputError("self-loop bond")
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise DegenerateInputError("bond endpoint out of range")
            adj[bond.a].append(k)
            adj[bond.b].append(k)
        self._adj = tuple(tuple(v) for v in adj)
        self._ring_bonds = None

    def __len__(self):
        return len(self.atoms)

    def bond_indices(self, atom: int):
        return self._adj[atom]

    def neighbors(self, atom: int):
        return [self.bonds[k].other(atom) for k in self._adj[atom]]

    def degree(self, atom: int) -> int:
        return len(self._adj[atom])

    def h_count(self, atom: int) -> int:
        """Hydrogen count: explicit when stored, else valence-derived."""
        a = self.atoms[atom]
        if a.explicit_h is not None:
            return a.explicit_h
        return self.derived_h(atom)

    def derived_h(self, atom: int) -> int:
        """Implicit hydrogens an unbracketed atom of this element carries."""
        a = self.atoms[atom]
        valences = DEFAULT_VALENCES.get(a.element)
        if valences is None or a.charge != 0:
            return 0
        used = sum(_bond_electrons(self.bonds[k].order) for k in self._adj[atom])
        if a.aromatic:
            used += 1
        for v in valences:
            if v >= used:
                return v - used
        return 0

    def ring_bonds(self) -> frozenset:
        """Indices of bonds lying on a cycle (non-bridge edges)."""
        if self._ring_bonds is None:
            self._ring_bonds = frozenset(_non_bridge_bonds(self))
        return self._ring_bonds

    def in_ring(self, atom: int) -> bool:
        ring = self.ring_bonds()
        return any(k in ring for k in self._adj[atom])

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element != "H")

    def molecular_weight(self) -> float:
        total = 0.0
        for i, a in enumerate(self.atoms):
            total += ATOMIC_WEIGHTS[a.element]
            total += ATOMIC_WEIGHTS["H"] * self.h_count(i)
        return total

    def components(self) -> list:
        """Connected components as index lists, in first-seen order."""
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in self.neighbors(i):
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
            comps.append(sorted(comp))
        return comps

    def subgraph(self, atom_indices) -> "Molecule":
        keep = list(atom_indices)
        index = {old: new for new, old in enumerate(keep)}
        atoms = [self.atoms[i] for i in keep]
        bonds = []
        for bond in self.bonds:
            if bond.a in index and bond.b in index:
                bonds.append(replace(bond, a=index[bond.a], b=index[bond.b]))
        return Molecule(atoms, bonds)

    def without_stereo(self) -> "Molecule":
        atoms = [replace(a, chiral=None) for a in self.atoms]
        bonds = [replace(b, direction=None) for b in self.bonds]
        return Molecule(atoms, bonds)


def _non_bridge_bonds(m: Molecule) -> set:
    """Bond indices on cycles, via iterative bridge-finding DFS."""
    n = len(m.atoms)
    disc = [-1] * n
    low = [0] * n
    bridges = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        # stack frames: (atom, incoming bond index, neighbor iterator position)
        stack = [(root, -1, iter(m.bond_indices(root)))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            v, in_bond, it = stack[-1]
            advanced = False
            for k in it:
                if k == in_bond:
                    continue
                w = m.bonds[k].other(v)
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, k, iter(m.bond_indices(w))))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        bridges.add(in_bond)
    return {k for k in range(len(m.bonds)) if k not in bridges}
