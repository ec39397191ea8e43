"""Synthesis oracles, the synthesis DAG, and recipe extraction.

The oracle contract is a function from (reagents, process conditions) to
a predicted product set, or Null when no reaction applies.  Two
deterministic oracles implement it:

* TemplateOracle: a fixed library of five bimolecular rewrite rules
  (esterification, amide coupling, Williamson ether, imine formation,
  N-alkylation), each gated on required conditions.  Rules fire in
  library order; when a functional group matches several sites, the one
  with the smallest canonical atom rank fires.  Condensation byproducts
  (water, HX) are dropped.
* JoinOracle (testing): under the ``join`` condition, bonds the first
  free-valence heavy atom (canonical order) of each of two reagents.

Every product node in the DAG keeps the reagents that produced it, so a
recipe is the target's ancestor closure in topological order.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Callable

from .errors import CycleDetected, InvalidMolecule, UnknownMolecule, ValenceExceeded
from .molgraph import (
    BondOrder,
    Molecule,
    add_explicit_hydrogens,
    parse_smiles,
    strip_hydrogens,
)


@dataclass(frozen=True)
class Condition:
    id: str


CONDITION_LIBRARY: tuple[Condition, ...] = (
    Condition("acid_cat"),
    Condition("base"),
    Condition("heat"),
    Condition("pd_cat"),
    Condition("neat"),
    Condition("join"),
)

_CONDITION_IDS = frozenset(c.id for c in CONDITION_LIBRARY)


class OracleKind(enum.Enum):
    TEMPLATE = "template"
    JOIN = "join"


def _condition_ids(conditions) -> frozenset[str]:
    ids = set()
    for c in conditions:
        cid = c.id if isinstance(c, Condition) else str(c)
        if cid not in _CONDITION_IDS:
            raise ValueError(f"unknown condition {cid!r}")
        ids.add(cid)
    return frozenset(ids)


# ---------------------------------------------------------------------------
# Functional-group patterns (heavy-skeleton matching)
# ---------------------------------------------------------------------------


def _canonical_rank(mol: Molecule) -> dict[int, int]:
    return {atom: pos for pos, atom in enumerate(mol.canonical_heavy_order())}


def _sorted_sites(mol: Molecule, sites: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    rank = _canonical_rank(mol)
    return sorted(sites, key=lambda site: tuple(rank[a] for a in site))


def find_carboxylic_acids(mol: Molecule) -> list[tuple[int, int, int]]:
    """Sites (carbon, carbonyl O, hydroxyl O) of -COOH groups."""
    sites = []
    for c in range(mol.n_atoms):
        if mol.atoms[c].symbol != "C":
            continue
        carbonyl = [
            j for j, o in mol.neighbors(c)
            if o is BondOrder.DOUBLE and mol.atoms[j].symbol == "O" and mol.degree(j) == 1
        ]
        hydroxyl = [
            j for j, o in mol.neighbors(c)
            if o is BondOrder.SINGLE and mol.atoms[j].symbol == "O"
            and mol.degree(j) == 1 and mol.free_valence(j) >= 1
        ]
        if carbonyl and hydroxyl:
            sites.append((c, carbonyl[0], hydroxyl[0]))
    return _sorted_sites(mol, sites)


def _is_carboxyl_carbon(mol: Molecule, c: int) -> bool:
    return any(
        o is BondOrder.DOUBLE and mol.atoms[j].symbol == "O"
        for j, o in mol.neighbors(c)
    )


def find_alcohols(mol: Molecule) -> list[tuple[int]]:
    """Hydroxyl oxygens bound to a non-carbonyl carbon."""
    sites = []
    for o in range(mol.n_atoms):
        if mol.atoms[o].symbol != "O" or mol.degree(o) != 1 or mol.free_valence(o) < 1:
            continue
        j, order = mol.neighbors(o)[0]
        if order is BondOrder.SINGLE and mol.atoms[j].symbol == "C" and not _is_carboxyl_carbon(mol, j):
            sites.append((o,))
    return _sorted_sites(mol, sites)


def find_primary_amines(mol: Molecule) -> list[tuple[int]]:
    """-NH2 nitrogens: one single-bonded carbon neighbor, two free slots."""
    sites = []
    for n in range(mol.n_atoms):
        if mol.atoms[n].symbol != "N" or mol.degree(n) != 1 or mol.free_valence(n) != 2:
            continue
        j, order = mol.neighbors(n)[0]
        if order is BondOrder.SINGLE and mol.atoms[j].symbol == "C":
            sites.append((n,))
    return _sorted_sites(mol, sites)


def find_amines_with_h(mol: Molecule) -> list[tuple[int]]:
    """Nitrogens with at least one free slot and only single bonds."""
    sites = []
    for n in range(mol.n_atoms):
        if mol.atoms[n].symbol != "N" or mol.free_valence(n) < 1:
            continue
        if all(o is BondOrder.SINGLE for _, o in mol.neighbors(n)):
            sites.append((n,))
    return _sorted_sites(mol, sites)


def find_halide_carbons(mol: Molecule) -> list[tuple[int, int]]:
    """Sites (carbon, halogen) of C-X single bonds (X in Cl, Br, I)."""
    sites = []
    for c in range(mol.n_atoms):
        if mol.atoms[c].symbol != "C":
            continue
        for j, o in mol.neighbors(c):
            if o is BondOrder.SINGLE and mol.atoms[j].symbol in ("Cl", "Br", "I"):
                sites.append((c, j))
    return _sorted_sites(mol, sites)


def find_aldehydes(mol: Molecule) -> list[tuple[int, int]]:
    """Sites (carbon, carbonyl O) of aldehyde groups (C(=O)H)."""
    sites = []
    for c in range(mol.n_atoms):
        if mol.atoms[c].symbol != "C" or mol.free_valence(c) < 1:
            continue
        carbonyl = [
            j for j, o in mol.neighbors(c)
            if o is BondOrder.DOUBLE and mol.atoms[j].symbol == "O" and mol.degree(j) == 1
        ]
        others = [j for j, _ in mol.neighbors(c) if j not in carbonyl]
        if carbonyl and len(others) <= 1:
            sites.append((c, carbonyl[0]))
    return _sorted_sites(mol, sites)


# ---------------------------------------------------------------------------
# Graph rewrites
# ---------------------------------------------------------------------------


def _combine(
    mol_a: Molecule,
    mol_b: Molecule,
    drop_a: set[int],
    drop_b: set[int],
    cross_bonds: list[tuple[int, int, BondOrder]],
) -> Molecule:
    """Merge two heavy skeletons, dropping atoms and adding cross bonds.

    Cross bonds reference original indices (a-side, b-side).
    """
    map_a = {}
    atoms = []
    for i, atom in enumerate(mol_a.atoms):
        if i not in drop_a:
            map_a[i] = len(atoms)
            atoms.append(atom)
    map_b = {}
    for i, atom in enumerate(mol_b.atoms):
        if i not in drop_b:
            map_b[i] = len(atoms)
            atoms.append(atom)
    bonds = {}
    for (i, j), order in mol_a.bonds.items():
        if i in map_a and j in map_a:
            bonds[(map_a[i], map_a[j])] = order
    for (i, j), order in mol_b.bonds.items():
        if i in map_b and j in map_b:
            bonds[(map_b[i], map_b[j])] = order
    for a, b, order in cross_bonds:
        bonds[(map_a[a], map_b[b])] = order
    return Molecule(atoms, bonds)


def _esterify(acid: Molecule, alcohol: Molecule, sites) -> Molecule:
    (c, _o_dbl, o_hydroxyl), (o_alc,) = sites
    return _combine(acid, alcohol, {o_hydroxyl}, set(), [(c, o_alc, BondOrder.SINGLE)])


def _amide(acid: Molecule, amine: Molecule, sites) -> Molecule:
    (c, _o_dbl, o_hydroxyl), (n,) = sites
    return _combine(acid, amine, {o_hydroxyl}, set(), [(c, n, BondOrder.SINGLE)])


def _ether(alcohol: Molecule, halide: Molecule, sites) -> Molecule:
    (o,), (c, x) = sites
    return _combine(alcohol, halide, set(), {x}, [(o, c, BondOrder.SINGLE)])


def _imine(aldehyde: Molecule, amine: Molecule, sites) -> Molecule:
    (c, o_dbl), (n,) = sites
    return _combine(aldehyde, amine, {o_dbl}, set(), [(c, n, BondOrder.DOUBLE)])


def _n_alkylate(amine: Molecule, halide: Molecule, sites) -> Molecule:
    (n,), (c, x) = sites
    return _combine(amine, halide, set(), {x}, [(n, c, BondOrder.SINGLE)])


GroupPattern = Callable[[Molecule], list[tuple]]


@dataclass(frozen=True)
class ReactionTemplate:
    name: str
    required_groups: tuple[GroupPattern, ...]
    required_conditions: frozenset[str]
    transform: Callable


TEMPLATE_LIBRARY: tuple[ReactionTemplate, ...] = (
    ReactionTemplate(
        "esterification",
        (find_carboxylic_acids, find_alcohols),
        frozenset({"acid_cat"}),
        _esterify,
    ),
    ReactionTemplate(
        "amide_coupling",
        (find_carboxylic_acids, find_primary_amines),
        frozenset({"heat"}),
        _amide,
    ),
    ReactionTemplate(
        "williamson_ether",
        (find_alcohols, find_halide_carbons),
        frozenset({"base"}),
        _ether,
    ),
    ReactionTemplate(
        "imine_formation",
        (find_aldehydes, find_primary_amines),
        frozenset({"acid_cat"}),
        _imine,
    ),
    ReactionTemplate(
        "n_alkylation",
        (find_amines_with_h, find_halide_carbons),
        frozenset({"base"}),
        _n_alkylate,
    ),
)

JOIN_TEMPLATE_NAME = "join"


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def _join_site(mol: Molecule) -> int | None:
    for atom in mol.canonical_heavy_order():
        if mol.free_valence(atom) >= 1:
            return atom
    return None


def synthesize_detailed(reagents, conditions, oracle: OracleKind):
    """Like :func:`synthesize` but also reports which rule fired:
    returns ``(products, template name)`` or None."""
    reagents = list(reagents)
    if not 1 <= len(reagents) <= 3:
        raise ValueError("synthesize takes one to three reagents")
    cond_ids = _condition_ids(conditions)
    heavy = [strip_hydrogens(m) for m in reagents]

    if oracle is OracleKind.JOIN:
        if len(heavy) != 2 or "join" not in cond_ids:
            return None
        a, b = heavy
        site_a, site_b = _join_site(a), _join_site(b)
        if site_a is None or site_b is None:
            return None
        product = _combine(a, b, set(), set(), [(site_a, site_b, BondOrder.SINGLE)])
        return {add_explicit_hydrogens(product)}, JOIN_TEMPLATE_NAME

    if oracle is OracleKind.TEMPLATE:
        if len(heavy) != 2:
            return None
        for template in TEMPLATE_LIBRARY:
            if not template.required_conditions <= cond_ids:
                continue
            for i, j in ((0, 1), (1, 0)):
                sites_a = template.required_groups[0](heavy[i])
                if not sites_a:
                    continue
                sites_b = template.required_groups[1](heavy[j])
                if not sites_b:
                    continue
                try:
                    product = template.transform(
                        heavy[i], heavy[j], (sites_a[0], sites_b[0])
                    )
                except (ValenceExceeded, InvalidMolecule):
                    continue  # template reports no-fire on invalid output
                return {add_explicit_hydrogens(product)}, template.name
        return None

    raise ValueError(f"unknown oracle {oracle!r}")


def synthesize(reagents, conditions, oracle: OracleKind):
    """Predicted product set for the reagents under the conditions, or
    None when no reaction applies.  Products are hydrogen-expanded.
    """
    outcome = synthesize_detailed(reagents, conditions, oracle)
    return None if outcome is None else outcome[0]


# ---------------------------------------------------------------------------
# Synthesis DAG
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SynthesisNode:
    molecule: str
    parents: tuple[str, ...]
    template: str | None
    conditions: frozenset[str]
    step: int


class SynthesisDag:
    """Provenance of every synthesized molecule, keyed by canonical form."""

    def __init__(self):
        self.nodes: dict[str, SynthesisNode] = {}

    def add_initial(self, molecule) -> SynthesisNode:
        canon = molecule if isinstance(molecule, str) else molecule.canonical_form
        node = self.nodes.get(canon)
        if node is None:
            node = SynthesisNode(canon, (), None, frozenset(), 0)
            self.nodes[canon] = node
        return node

    def __contains__(self, canon: str) -> bool:
        return canon in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)


def _canon(molecule) -> str:
    return molecule if isinstance(molecule, str) else molecule.canonical_form


def record_synthesis(
    dag: SynthesisDag, products, parents, template, conditions, step: int
) -> SynthesisDag:
    """Insert product nodes; a product already reachable keeps its
    earliest recipe.  Parents must already be present."""
    parent_keys = tuple(_canon(p) for p in parents)
    for key in parent_keys:
        if key not in dag.nodes:
            raise UnknownMolecule(f"parent {key!r} not in synthesis DAG")
        if dag.nodes[key].step >= step:
            raise CycleDetected(
                f"step {step} does not follow parent step {dag.nodes[key].step}"
            )
    cond_ids = _condition_ids(conditions)
    for product in products:
        key = _canon(product)
        existing = dag.nodes.get(key)
        if existing is not None and existing.step <= step:
            continue
        dag.nodes[key] = SynthesisNode(key, parent_keys, template, cond_ids, step)
    return dag


@dataclass(frozen=True)
class RecipeStep:
    molecule: str
    parents: tuple[str, ...]
    template: str | None
    conditions: tuple[str, ...]
    step: int
    from_pool: bool


def recipe(dag: SynthesisDag, target) -> list[RecipeStep]:
    """Topologically ordered minimal ancestor closure of the target;
    initial-pool reagents come first, marked ``from_pool``."""
    key = _canon(target)
    if key not in dag.nodes:
        raise UnknownMolecule(f"{key!r} not in synthesis DAG")
    closure: dict[str, SynthesisNode] = {}
    frontier = [key]
    while frontier:
        k = frontier.pop()
        if k in closure:
            continue
        node = dag.nodes[k]
        closure[k] = node
        frontier.extend(node.parents)
    ordered = sorted(closure.values(), key=lambda n: (n.step, n.molecule))
    return [
        RecipeStep(
            molecule=n.molecule,
            parents=n.parents,
            template=n.template,
            conditions=tuple(sorted(n.conditions)),
            step=n.step,
            from_pool=not n.parents,
        )
        for n in ordered
    ]


def replay_recipe(steps: list[RecipeStep], oracle: OracleKind) -> Molecule:
    """Re-run a recipe's reactions and return the final product.

    Raises if any step fails to regenerate its recorded molecule.
    """
    made: dict[str, Molecule] = {}
    last = None
    for step in steps:
        if step.from_pool:
            made[step.molecule] = add_explicit_hydrogens(parse_smiles(step.molecule))
            last = made[step.molecule]
            continue
        reagents = [made[p] for p in step.parents]
        products = synthesize(reagents, step.conditions, oracle)
        if products is None:
            raise InvalidMolecule(f"recipe step for {step.molecule!r} failed to fire")
        match = next(
            (p for p in products if p.canonical_form == step.molecule), None
        )
        if match is None:
            raise InvalidMolecule(
                f"recipe step regenerated {[p.canonical_form for p in products]}, "
                f"expected {step.molecule!r}"
            )
        made[step.molecule] = match
        last = match
    return last


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def recipe_to_json(target: str, steps: list[RecipeStep]) -> dict:
    return {
        "target": target,
        "steps": [
            {
                "molecule": s.molecule,
                "parents": list(s.parents),
                "template": s.template,
                "conditions": list(s.conditions),
                "step": s.step,
            }
            for s in steps
        ],
    }


def recipe_to_graph_text(steps: list[RecipeStep]) -> str:
    """One node/edge per line, for external rendering."""
    lines = []
    for s in steps:
        tag = "pool" if s.from_pool else f"step={s.step}"
        lines.append(f"node {s.molecule} {tag}")
    for s in steps:
        for p in s.parents:
            lines.append(f"edge {p} -> {s.molecule}")
    return "\n".join(lines)


def dag_to_json(dag: SynthesisDag) -> dict:
    return {
        "nodes": [
            {
                "molecule": n.molecule,
                "parents": list(n.parents),
                "template": n.template,
                "conditions": sorted(n.conditions),
                "step": n.step,
            }
            for n in sorted(dag.nodes.values(), key=lambda n: (n.step, n.molecule))
        ]
    }


def dag_from_json(data: dict) -> SynthesisDag:
    dag = SynthesisDag()
    for raw in data["nodes"]:
        dag.nodes[raw["molecule"]] = SynthesisNode(
            molecule=raw["molecule"],
            parents=tuple(raw["parents"]),
            template=raw["template"],
            conditions=frozenset(raw["conditions"]),
            step=int(raw["step"]),
        )
    return dag


def save_dag(dag: SynthesisDag, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dag_to_json(dag), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dag(path) -> SynthesisDag:
    with open(path, "r", encoding="utf-8") as fh:
        return dag_from_json(json.load(fh))
