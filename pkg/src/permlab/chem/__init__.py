from .canon import canonical_ranks, canonical_smiles, write_smiles
from .fingerprint import Fingerprint, fold_fingerprint, maxmin_diversity_pick, tanimoto
from .mol import AROMATIC, ATOMIC_WEIGHTS, Atom, Bond, Molecule
from .scaffold import generic_murcko_scaffold
from .smiles import parse_smiles
from .standardize import (
    SaltList,
    cleanup,
    default_salt_list,
    desalt,
    most_significant_fragment,
    neutralize,
)

__all__ = [
    "AROMATIC",
    "ATOMIC_WEIGHTS",
    "Atom",
    "Bond",
    "Fingerprint",
    "Molecule",
    "SaltList",
    "canonical_ranks",
    "canonical_smiles",
    "cleanup",
    "default_salt_list",
    "desalt",
    "fold_fingerprint",
    "generic_murcko_scaffold",
    "maxmin_diversity_pick",
    "most_significant_fragment",
    "neutralize",
    "parse_smiles",
    "tanimoto",
    "write_smiles",
]
