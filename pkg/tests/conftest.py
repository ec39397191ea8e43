import random
from pathlib import Path

import pytest

from molbo.errors import InvalidMolecule, MultiFragmentInput, ValenceExceeded
from molbo.molgraph import (
    BondOrder,
    Molecule,
    PERIODIC_TABLE,
    add_explicit_hydrogens,
)

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def corpus() -> list[str]:
    lines = (DATA_DIR / "corpus.smi").read_text().splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]


@pytest.fixture(scope="session")
def small_pool_path() -> Path:
    return DATA_DIR / "pool_small.smi"


@pytest.fixture(scope="session")
def template_pool_path() -> Path:
    return DATA_DIR / "pool_template.smi"


def relabel(mol: Molecule, rng: random.Random) -> Molecule:
    """Same molecule with randomly permuted atom indices."""
    n = mol.n_atoms
    perm = list(range(n))
    rng.shuffle(perm)
    atoms = [None] * n
    for old, new in enumerate(perm):
        atoms[new] = mol.atoms[old]
    bonds = {(perm[i], perm[j]): o for (i, j), o in mol.bonds.items()}
    return Molecule(atoms, bonds)


def random_molecule(rng: random.Random, max_heavy: int = 6, ring_p: float = 0.25,
                    expanded: bool = True) -> Molecule:
    """Random small connected molecule (random spanning tree plus an
    occasional ring edge), retried until valence-valid."""
    elems = ["C", "C", "C", "N", "O", "S", "F", "Cl"]
    while True:
        try:
            n = rng.randint(1, max_heavy)
            atoms = [PERIODIC_TABLE[rng.choice(elems)] for _ in range(n)]
            bonds = {}
            for i in range(1, n):
                j = rng.randrange(i)
                order = rng.choice(
                    [BondOrder.SINGLE] * 4 + [BondOrder.DOUBLE, BondOrder.TRIPLE]
                )
                bonds[(j, i)] = order
            if n >= 3 and rng.random() < ring_p:
                i, j = sorted(rng.sample(range(n), 2))
                bonds.setdefault((i, j), BondOrder.SINGLE)
            mol = Molecule(atoms, bonds)
            return add_explicit_hydrogens(mol) if expanded else mol
        except (ValenceExceeded, InvalidMolecule, MultiFragmentInput):
            continue
