"""SMILES reading and rank-driven writing.

The accepted grammar covers the organic subset, bracket atoms (isotope,
chirality, H-count, charge, atom class), aromatic lowercase forms, ring
closures including %nn, branches, dot-separated components, and the
directional/chirality stereo markers (kept on the graph, never written
back out). Wildcard atoms and reaction arrows are rejected.
"""

from __future__ import annotations

from ..errors import SmilesSyntaxError
from .mol import (
    AROMATIC,
    AROMATIC_ELEMENTS,
    ATOMIC_WEIGHTS,
    ORGANIC_SUBSET,
    Atom,
    Bond,
    Molecule,
)

_TWO_CHAR_ORGANIC = ("Cl", "Br")
_BOND_ORDERS = {"-": 1, "=": 2, "#": 3, ":": AROMATIC, "/": 1, "\\": 1}


def parse_smiles(text: str) -> Molecule:
    """Parse one SMILES string into a molecular graph."""
    if not text or not text.strip():
        raise SmilesSyntaxError("empty SMILES", 0)
    s = text.strip()
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_keys = set()
    prev: int | None = None
    pending_order = None
    pending_direction = None
    branch_stack: list[int] = []
    # ring number -> (atom index, order or None, direction, position)
    open_rings: dict[int, tuple] = {}
    i = 0
    n = len(s)

    def add_bond(a: int, b: int, order, direction, pos: int):
        if a == b:
            raise SmilesSyntaxError("ring bond to the same atom", pos)
        key = (min(a, b), max(a, b))
        if key in bond_keys:
            raise SmilesSyntaxError("duplicate bond between atoms", pos)
        bond_keys.add(key)
        both_aromatic = atoms[a].aromatic and atoms[b].aromatic
        if order is None:
            order = AROMATIC if both_aromatic else 1
        if order == AROMATIC and not both_aromatic:
            raise SmilesSyntaxError(
                "aromatic bond requires aromatic atoms on both ends", pos
            )
        bonds.append(Bond(a, b, order, direction))

    def attach(idx: int, pos: int):
        nonlocal prev, pending_order, pending_direction
        if prev is not None:
            add_bond(prev, idx, pending_order, pending_direction, pos)
        elif pending_order is not None or pending_direction is not None:
            raise SmilesSyntaxError("bond symbol with no preceding atom", pos)
        prev = idx
        pending_order = None
        pending_direction = None

    def ring_closure(num: int, pos: int):
        nonlocal pending_order, pending_direction
        if prev is None:
            raise SmilesSyntaxError("ring closure before any atom", pos)
        if num in open_rings:
            other, order0, dir0, pos0 = open_rings.pop(num)
            order = pending_order
            if order0 is not None and order is not None and order0 != order:
                raise SmilesSyntaxError(
                    f"ring bond {num} order mismatch with position {pos0}", pos
                )
            add_bond(other, prev, order if order is not None else order0,
                     dir0 or pending_direction, pos)
        else:
            open_rings[num] = (prev, pending_order, pending_direction, pos)
        pending_order = None
        pending_direction = None

    while i < n:
        ch = s[i]
        if ch == ">":
            raise SmilesSyntaxError("reaction SMILES not supported", i)
        if ch == "*":
            raise SmilesSyntaxError("wildcard atom not supported", i)
        if ch in _BOND_ORDERS:
            if pending_order is not None or pending_direction is not None:
                raise SmilesSyntaxError("two bond symbols in a row", i)
            if ch in ("/", "\\"):
                pending_direction = ch
                pending_order = 1
            else:
                pending_order = _BOND_ORDERS[ch]
            i += 1
            continue
        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch cannot start a SMILES", i)
            branch_stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unmatched closing parenthesis", i)
            if pending_order is not None:
                raise SmilesSyntaxError("dangling bond symbol before ')'", i)
            prev = branch_stack.pop()
            i += 1
            continue
        if ch == ".":
            if branch_stack:
                raise SmilesSyntaxError("component separator inside a branch", i)
            if pending_order is not None or pending_direction is not None:
                raise SmilesSyntaxError("bond symbol before '.'", i)
            if prev is None:
                raise SmilesSyntaxError("empty component before '.'", i)
            prev = None
            i += 1
            continue
        if ch.isdigit():
            ring_closure(int(ch), i)
            i += 1
            continue
        if ch == "%":
            if i + 2 >= n or not (s[i + 1].isdigit() and s[i + 2].isdigit()):
                raise SmilesSyntaxError("% ring closure needs two digits", i)
            ring_closure(int(s[i + 1 : i + 3]), i)
            i += 3
            continue
        if ch == "[":
            atom, width = _parse_bracket(s, i)
            atoms.append(atom)
            attach(len(atoms) - 1, i)
            i += width
            continue
        matched = False
        for sym in _TWO_CHAR_ORGANIC:
            if s.startswith(sym, i):
                atoms.append(Atom(element=sym))
                attach(len(atoms) - 1, i)
                i += 2
                matched = True
                break
        if matched:
            continue
        if ch in "BCNOPSFI":
            atoms.append(Atom(element=ch))
            attach(len(atoms) - 1, i)
            i += 1
            continue
        if ch in "bcnops":
            atoms.append(Atom(element=ch.upper(), aromatic=True))
            attach(len(atoms) - 1, i)
            i += 1
            continue
        raise SmilesSyntaxError(f"unexpected character {ch!r}", i)

    if branch_stack:
        raise SmilesSyntaxError("unclosed branch", n)
    if open_rings:
        nums = sorted(open_rings)
        raise SmilesSyntaxError(
            f"unclosed ring bond {', '.join(str(x) for x in nums)}",
            open_rings[nums[0]][3],
        )
    if pending_order is not None or pending_direction is not None:
        raise SmilesSyntaxError("dangling bond symbol at end of input", n)
    if not atoms:
        raise SmilesSyntaxError("no atoms", 0)
    return Molecule(atoms, bonds)


def _parse_bracket(s: str, start: int) -> tuple[Atom, int]:
    end = s.find("]", start)
    if end == -1:
        raise SmilesSyntaxError("unmatched '['", start)
    body = s[start + 1 : end]
    i = 0
    pos = start + 1

    isotope = None
    j = i
    while j < len(body) and body[j].isdigit():
        j += 1
    if j > i:
        isotope = int(body[i:j])
        i = j

    if i >= len(body):
        raise SmilesSyntaxError("bracket atom missing element symbol", pos + i)
    aromatic = False
    element = None
    for sym in ("se", "as"):
        if body.startswith(sym, i):
            element = sym.capitalize()
            aromatic = True
            i += 2
            break
    if element is None and body[i] in "bcnops":
        element = body[i].upper()
        aromatic = True
        i += 1
    if element is None:
        if not body[i].isupper():
            raise SmilesSyntaxError(f"bad element symbol {body[i]!r}", pos + i)
        if i + 1 < len(body) and body[i + 1].islower() and body[i : i + 2] in ATOMIC_WEIGHTS:
            element = body[i : i + 2]
            i += 2
        else:
            element = body[i]
            i += 1
    if element not in ATOMIC_WEIGHTS:
        raise SmilesSyntaxError(f"unknown element {element!r}", pos)
    if aromatic and element not in AROMATIC_ELEMENTS:
        raise SmilesSyntaxError(f"{element} cannot be aromatic", pos)

    chiral = None
    if i < len(body) and body[i] == "@":
        chiral = "@"
        i += 1
        if i < len(body) and body[i] == "@":
            chiral = "@@"
            i += 1
        # extended chirality classes (@TH1, @AL1, ...) are out of scope
        if i < len(body) and body[i].isupper() and body[i] != "H":
            raise SmilesSyntaxError("extended chirality not supported", pos + i)

    h_count = 0
    if i < len(body) and body[i] == "H":
        i += 1
        j = i
        while j < len(body) and body[j].isdigit():
            j += 1
        h_count = int(body[i:j]) if j > i else 1
        i = j

    charge = 0
    if i < len(body) and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        i += 1
        j = i
        while j < len(body) and body[j].isdigit():
            j += 1
        if j > i:
            charge = sign * int(body[i:j])
            i = j
        else:
            charge = sign
            while i < len(body) and body[i] == body[i - 1]:
                charge += sign
                i += 1

    if i < len(body) and body[i] == ":":
        i += 1
        j = i
        while j < len(body) and body[j].isdigit():
            j += 1
        if j == i:
            raise SmilesSyntaxError("atom class ':' needs digits", pos + i)
        i = j  # atom maps are parsed and discarded

    if i != len(body):
        raise SmilesSyntaxError(f"unparsed bracket content {body[i:]!r}", pos + i)
    atom = Atom(
        element=element,
        charge=charge,
        isotope=isotope,
        aromatic=aromatic,
        explicit_h=h_count,
        chiral=chiral,
    )
    return atom, end - start + 1


def _needs_bracket(m: Molecule, idx: int) -> bool:
    a = m.atoms[idx]
    if a.element not in ORGANIC_SUBSET:
        return True
    if a.charge != 0 or a.isotope is not None:
        return True
    if a.aromatic and a.element not in {"B", "C", "N", "O", "P", "S"}:
        return True
    if a.explicit_h is not None and a.explicit_h != m.derived_h(idx):
        return True
    return False


def _atom_token(m: Molecule, idx: int) -> str:
    a = m.atoms[idx]
    symbol = a.element.lower() if a.aromatic else a.element
    if not _needs_bracket(m, idx):
        return symbol
    parts = ["["]
    if a.isotope is not None:
        parts.append(str(a.isotope))
    parts.append(symbol)
    h = m.h_count(idx)
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    if a.charge == 1:
        parts.append("+")
    elif a.charge == -1:
        parts.append("-")
    elif a.charge > 1:
        parts.append(f"+{a.charge}")
    elif a.charge < -1:
        parts.append(f"-{-a.charge}")
    parts.append("]")
    return "".join(parts)


def _bond_token(m: Molecule, bond: Bond) -> str:
    both_aromatic = m.atoms[bond.a].aromatic and m.atoms[bond.b].aromatic
    if bond.order == AROMATIC:
        return ""
    if bond.order == 1:
        # a bare single bond between aromatic atoms would re-parse as
        # aromatic, so it must be spelled out
        return "-" if both_aromatic else ""
    return {2: "=", 3: "#"}[bond.order]


def serialize(m: Molecule, ranks) -> str:
    """Write SMILES visiting atoms in ascending rank order.

    With all ranks distinct the output depends only on the graph and the
    ranks, never on atom storage order. Stereo markers are not emitted.
    """
    n = len(m.atoms)
    visited = [False] * n

    # pass 1: rank-ordered preorder spanning forest; bonds reaching an
    # already-visited atom become ring closures
    tree: dict[int, list] = {v: [] for v in range(n)}
    ring_at: dict[int, list] = {v: [] for v in range(n)}
    closure_bonds: set[int] = set()

    def build_tree(v: int, parent: int | None):
        visited[v] = True
        ordered = sorted(m.bond_indices(v), key=lambda k: ranks[m.bonds[k].other(v)])
        for k in ordered:
            w = m.bonds[k].other(v)
            if not visited[w]:
                tree[v].append((w, k))
                build_tree(w, v)
            elif w != parent and k not in closure_bonds:
                closure_bonds.add(k)
                ring_at[v].append((w, k))
                ring_at[w].append((v, k))

    # components start at their lowest-rank terminal atom when one exists,
    # else their lowest-rank atom
    roots = []
    by_rank = sorted(range(n), key=lambda i: ranks[i])
    for seed_atom in by_rank:
        if visited[seed_atom]:
            continue
        comp = _component_atoms(m, seed_atom)
        terminals = [v for v in comp if m.degree(v) <= 1]
        root = min(terminals, key=lambda i: ranks[i]) if terminals else min(
            comp, key=lambda i: ranks[i]
        )
        roots.append(root)
        build_tree(root, None)
    for v in range(n):
        ring_at[v].sort(key=lambda wk: ranks[wk[0]])

    # pass 2: render, allocating ring-closure digits in emission order
    open_digits: dict[int, int] = {}
    in_use: set[int] = set()

    def take_digit(k: int) -> int:
        d = 1
        while d in in_use:
            d += 1
        if d > 99:
            raise SmilesSyntaxError("more than 99 simultaneous ring closures", 0)
        in_use.add(d)
        open_digits[k] = d
        return d

    def atom_text(v: int) -> str:
        parts = [_atom_token(m, v)]
        for _, k in ring_at[v]:
            if k in open_digits:
                d = open_digits.pop(k)
                in_use.discard(d)
            else:
                d = take_digit(k)
            parts.append(_bond_token(m, m.bonds[k]) + _ring_digit_text(d))
        return "".join(parts)

    def render(v: int) -> str:
        parts = [atom_text(v)]
        children = tree[v]
        for i, (w, k) in enumerate(children):
            sub = _bond_token(m, m.bonds[k]) + render(w)
            if i < len(children) - 1:
                parts.append(f"({sub})")
            else:
                parts.append(sub)
        return "".join(parts)

    return ".".join(render(root) for root in roots)


def _component_atoms(m: Molecule, root: int) -> list:
    seen = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for w in m.neighbors(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return sorted(seen)


def _ring_digit_text(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"
