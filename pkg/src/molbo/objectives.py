"""Black-box objective functions over molecules.

The partition-coefficient and drug-likeness objectives are documented
surrogates: per-element contribution tables and desirability bands are
plain configuration data, not literature-fitted values.  They keep the
optimization loop reproducible without a chemistry-toolkit dependency;
the loop itself is objective-agnostic.

Shipped kinds:

* heavy_atom: ``-|heavy atom count - target|`` (deterministic test
  objective, maximal exactly at the target).
* logp: sum of per-element contributions over all atoms.
* penlogp: logp minus a complexity proxy minus a long-ring penalty
  (``max(0, size - 6)`` summed over a minimum cycle basis).
* qed: geometric mean of four trapezoidal desirability scores in (0, 1]
  (molecular mass, logp, H-bond donors, H-bond acceptors).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx

from .errors import InvalidMolecule, MissingContribution
from .molgraph import Molecule, WeightMode, molecular_weight

#: Additive logP-style contributions per element.  Surrogate values:
#: hydrophobic atoms positive, polar atoms negative.
DEFAULT_CONTRIBUTIONS: dict[str, float] = {
    "H": 0.11,
    "B": 0.04,
    "C": 0.34,
    "N": -0.60,
    "O": -0.45,
    "F": 0.14,
    "P": -0.30,
    "S": 0.25,
    "Cl": 0.65,
    "Br": 0.86,
    "I": 1.10,
}


@dataclass(frozen=True)
class Band:
    """Trapezoidal desirability: rises a..b, flat 1 on b..c, falls c..d;
    never below ``floor`` so geometric means stay positive."""

    a: float
    b: float
    c: float
    d: float
    floor: float = 0.05

    def score(self, x: float) -> float:
        if self.b <= x <= self.c:
            t = 1.0
        elif self.a < x < self.b:
            t = (x - self.a) / (self.b - self.a)
        elif self.c < x < self.d:
            t = (self.d - x) / (self.d - self.c)
        else:
            t = 0.0
        return max(self.floor, t)


DEFAULT_QED_BANDS: dict[str, Band] = {
    "mass": Band(40.0, 160.0, 400.0, 600.0),
    "logp": Band(-2.0, 0.0, 3.0, 6.0),
    "donors": Band(-1.0, 0.0, 3.0, 6.0),
    "acceptors": Band(-1.0, 0.0, 6.0, 11.0),
}


class ObjectiveKind(enum.Enum):
    HEAVY_ATOM_TARGET = "heavy_atom"
    LOGP = "logp"
    PENLOGP = "penlogp"
    QED = "qed"


@dataclass(frozen=True)
class Objective:
    kind: ObjectiveKind
    target: int = 25
    contributions: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_CONTRIBUTIONS)
    )
    qed_bands: Mapping[str, Band] = field(
        default_factory=lambda: dict(DEFAULT_QED_BANDS)
    )


def _contribution_sum(obj: Objective, mol: Molecule) -> float:
    total = 0.0
    for atom in mol.atoms:
        try:
            total += obj.contributions[atom.symbol]
        except KeyError:
            raise MissingContribution(
                f"no contribution configured for element {atom.symbol}"
            ) from None
    return total


def _heavy_graph(mol: Molecule) -> nx.Graph:
    g = nx.Graph()
    heavy = set(mol.heavy_indices())
    g.add_nodes_from(heavy)
    g.add_edges_from((i, j) for (i, j) in mol.bonds if i in heavy and j in heavy)
    return g


def ring_data(mol: Molecule) -> tuple[list[set[int]], float, float]:
    """Minimum cycle basis plus the derived penalties.

    Returns (rings, long-ring penalty, fused-ring count): the penalty is
    ``sum(max(0, len(ring) - 6))`` and a ring counts as fused when it
    shares an atom with another basis ring.
    """
    rings = [set(c) for c in nx.minimum_cycle_basis(_heavy_graph(mol))]
    penalty = float(sum(max(0, len(r) - 6) for r in rings))
    fused = 0
    for i, r in enumerate(rings):
        if any(r & other for j, other in enumerate(rings) if j != i):
            fused += 1
    return rings, penalty, float(fused)


def _complexity_proxy(mol: Molecule, fused_rings: float) -> float:
    branched = sum(
        1
        for i in mol.heavy_indices()
        if sum(1 for j, _ in mol.neighbors(i) if mol.atoms[j].symbol != "H") >= 3
    )
    return 0.25 * branched + 0.5 * fused_rings


def _hbond_counts(mol: Molecule) -> tuple[int, int]:
    donors = 0
    acceptors = 0
    for i, atom in enumerate(mol.atoms):
        if atom.symbol not in ("O", "N"):
            continue
        acceptors += 1
        if any(mol.atoms[j].symbol == "H" for j, _ in mol.neighbors(i)):
            donors += 1
    return donors, acceptors


def evaluate(obj: Objective, mol: Molecule) -> float:
    """Objective value of a hydrogen-expanded molecule.

    Deterministic and invariant under atom relabeling; isomorphic
    molecules always score equally.
    """
    if not mol.is_expanded():
        raise InvalidMolecule("objectives require hydrogen-expanded molecules")
    if obj.kind is ObjectiveKind.HEAVY_ATOM_TARGET:
        return -abs(mol.heavy_atom_count() - obj.target)
    if obj.kind is ObjectiveKind.LOGP:
        return _contribution_sum(obj, mol)
    if obj.kind is ObjectiveKind.PENLOGP:
        _, ring_penalty, fused = ring_data(mol)
        return _contribution_sum(obj, mol) - _complexity_proxy(mol, fused) - ring_penalty
    if obj.kind is ObjectiveKind.QED:
        logp = _contribution_sum(obj, mol)
        donors, acceptors = _hbond_counts(mol)
        bands = obj.qed_bands
        scores = (
            bands["mass"].score(molecular_weight(mol, WeightMode.MASS)),
            bands["logp"].score(logp),
            bands["donors"].score(float(donors)),
            bands["acceptors"].score(float(acceptors)),
        )
        product = 1.0
        for s in scores:
            product *= s
        return product ** (1.0 / len(scores))
    raise ValueError(f"unknown objective kind {obj.kind!r}")


# ---------------------------------------------------------------------------
# Configuration files
# ---------------------------------------------------------------------------


def objective_from_config(
    kind: ObjectiveKind, target: int = 25, config: dict | None = None
) -> Objective:
    """Build an objective, overriding tables from a config mapping with
    optional ``contribution_table`` and ``qed_bands`` entries."""
    contributions = dict(DEFAULT_CONTRIBUTIONS)
    bands = dict(DEFAULT_QED_BANDS)
    if config:
        contributions.update(config.get("contribution_table", {}))
        for name, raw in config.get("qed_bands", {}).items():
            bands[name] = Band(
                a=float(raw["a"]),
                b=float(raw["b"]),
                c=float(raw["c"]),
                d=float(raw["d"]),
                floor=float(raw.get("floor", 0.05)),
            )
    return Objective(kind=kind, target=target, contributions=contributions, qed_bands=bands)


def load_objective_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
