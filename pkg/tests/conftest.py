"""Shared fixtures: planted synthetic data and a random SMILES corpus."""

import numpy as np
import pytest

from permlab.chem import default_salt_list, parse_smiles
from permlab.data import synth_dataset

_BRANCHES = ("C", "CC", "O", "N", "F", "Cl", "Br", "C(C)C")
_RING_PREFIXES = ("C1CCCCC1", "c1ccccc1", "C1CCCC1", "C1CCOCC1", "C1CCNCC1")


def random_plain_smiles(rng) -> str:
    """One random neutral single-fragment SMILES, 5-18 heavy atoms.

    Construction keeps every atom inside its valence: heteroatoms only
    mid-chain with two single bonds, double bonds only between bare
    chain carbons, branches only on carbons not touching a double bond.
    """
    n = int(rng.integers(5, 11))
    heavies = []
    for i in range(n):
        if 0 < i < n - 1 and rng.random() < 0.2:
            heavies.append(str(rng.choice(("N", "O", "S"))))
        else:
            heavies.append("C")
    doubles = set()
    for i in range(n - 1):
        if heavies[i] == "C" and heavies[i + 1] == "C" and (i - 1) not in doubles:
            if rng.random() < 0.12:
                doubles.add(i)
    parts = []
    for i, el in enumerate(heavies):
        tok = el
        if (
            el == "C"
            and i not in doubles
            and (i - 1) not in doubles
            and rng.random() < 0.25
        ):
            tok += "(%s)" % rng.choice(_BRANCHES)
        parts.append(tok)
        if i in doubles:
            parts.append("=")
    core = "".join(parts)
    if rng.random() < 0.35:
        core = str(rng.choice(_RING_PREFIXES)) + core
    return core


@pytest.fixture(scope="session")
def smiles_corpus():
    """1000 random valid SMILES, none of which is itself a salt."""
    salts = default_salt_list()
    rng = np.random.default_rng(20260818)
    corpus = []
    while len(corpus) < 1000:
        s = random_plain_smiles(rng)
        if salts.matches(parse_smiles(s)):
            continue
        corpus.append(s)
    return corpus


@pytest.fixture(scope="session")
def synth143():
    return synth_dataset(
        seed=11, n_compounds=143, n_features=38, n_targets=6, noise_sd=0.3
    )


@pytest.fixture(scope="session")
def synth_small():
    return synth_dataset(
        seed=3, n_compounds=60, n_features=10, n_targets=3, noise_sd=0.2
    )
