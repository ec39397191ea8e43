"""Molecular graphs, a small SMILES dialect, and canonical forms.

A molecule is an immutable labeled graph: atoms carry an element, bonds
carry an order (single, double, triple, aromatic).  The parser covers a
deliberately small SMILES subset: organic-subset atoms, lowercase
aromatic atoms, branches, ring closures ``1``-``9`` and ``%nn``, bond
symbols ``- = # :`` and bare bracket atoms ``[X]``.  Charges, isotopes,
stereo marks and dot-separated fragments are rejected.

Canonical forms are produced by Morgan-style extended-connectivity
refinement over the heavy-atom skeleton, with remaining ties resolved by
exploring the tied atoms and keeping the lexicographically smallest
emitted string.  This is not a universal isomorphism certificate, but it
is deterministic and order-invariant for the graphs this toolkit builds.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

from .errors import (
    InvalidMolecule,
    MultiFragmentInput,
    UnbalancedBranch,
    UnclosedRing,
    UnknownToken,
    ValenceExceeded,
)


@dataclass(frozen=True)
class Element:
    """A chemical element with its standard valence set.

    ``valences`` lists accepted valences in ascending order; hydrogen
    filling targets the smallest entry covering the current bond sum,
    and the largest entry is the hard cap checked at construction.
    """

    symbol: str
    atomic_mass: float
    valences: tuple[int, ...]

    @property
    def default_valence(self) -> int:
        return self.valences[-1]

    def fill_valence(self, bond_sum: int) -> int:
        """Smallest standard valence >= bond_sum, or -1 if none fits."""
        for v in self.valences:
            if v >= bond_sum:
                return v
        return -1


PERIODIC_TABLE: dict[str, Element] = {
    "H": Element("H", 1.008, (1,)),
    "B": Element("B", 10.81, (3,)),
    "C": Element("C", 12.011, (4,)),
    "N": Element("N", 14.007, (3,)),
    "O": Element("O", 15.999, (2,)),
    "F": Element("F", 18.998, (1,)),
    "P": Element("P", 30.974, (5,)),
    "S": Element("S", 32.06, (2, 4, 6)),
    "Cl": Element("Cl", 35.45, (1,)),
    "Br": Element("Br", 79.904, (1,)),
    "I": Element("I", 126.904, (1,)),
}


class BondOrder(enum.Enum):
    SINGLE = "-"
    DOUBLE = "="
    TRIPLE = "#"
    AROMATIC = ":"

    @property
    def valence_contribution(self) -> float:
        return _BOND_VALENCE[self]

    @property
    def symbol(self) -> str:
        return self.value


_BOND_VALENCE = {
    BondOrder.SINGLE: 1.0,
    BondOrder.DOUBLE: 2.0,
    BondOrder.TRIPLE: 3.0,
    BondOrder.AROMATIC: 1.5,
}

# Stable small integers used in canonical-ordering keys.
_BOND_RANK = {
    BondOrder.SINGLE: 0,
    BondOrder.DOUBLE: 1,
    BondOrder.TRIPLE: 2,
    BondOrder.AROMATIC: 3,
}

# Elements that may be written as lowercase aromatic atoms.
_AROMATIC_WRITABLE = frozenset({"B", "C", "N", "O", "P", "S"})


class WeightMode(enum.Enum):
    UNIT = "unit"
    MASS = "mass"


def atom_weight(element: Element, mode: WeightMode) -> float:
    """Matching weight of one atom: 1.0 or its atomic mass."""
    if mode is WeightMode.UNIT:
        return 1.0
    return element.atomic_mass


@dataclass(frozen=True)
class BondProfile:
    """Multiset of (bond order, endpoint element pair) around one atom.

    Entries are sorted ``(order symbol, low element, high element)``
    triples, one per incident bond.
    """

    entries: tuple[tuple[str, str, str], ...]

    def counter(self) -> Counter:
        return Counter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


class Molecule:
    """Immutable connected graph of atoms and bonds.

    ``atoms`` is a tuple of Elements (list position is the atom index);
    ``bonds`` maps sorted index pairs to bond orders.  Valence and
    connectivity invariants are checked at construction.  Instances
    cache derived data (canonical form, hydrogen expansion, per-atom
    bond profiles); operations are pure and safe to call concurrently.
    """

    __slots__ = (
        "atoms",
        "bonds",
        "_adjacency",
        "_canonical",
        "_canonical_heavy_order",
        "_expanded",
        "_is_expanded",
        "_profiles",
        "_transport_classes",
    )

    def __init__(self, atoms, bonds):
        atoms = tuple(atoms)
        if not atoms:
            raise InvalidMolecule("molecule must contain at least one atom")
        n = len(atoms)
        norm: dict[tuple[int, int], BondOrder] = {}
        adjacency: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
        for (i, j), order in dict(bonds).items():
            if i == j:
                raise InvalidMolecule(f"self bond on atom {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidMolecule(f"bond ({i}, {j}) references a missing atom")
            key = (i, j) if i < j else (j, i)
            if key in norm:
                raise InvalidMolecule(f"duplicate bond {key}")
            norm[key] = order
            adjacency[i].append((j, order))
            adjacency[j].append((i, order))
        self.atoms = atoms
        self.bonds = norm
        self._adjacency = tuple(tuple(sorted(nbrs, key=lambda t: t[0])) for nbrs in adjacency)
        self._canonical = None
        self._canonical_heavy_order = None
        self._expanded = None
        self._is_expanded = None
        self._profiles = None
        self._transport_classes = {}
        self._check_connected()
        self._check_valence()

    # -- invariants ----------------------------------------------------

    def _check_connected(self):
        n = len(self.atoms)
        seen = [False] * n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for v, _ in self._adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        if count != n:
            raise MultiFragmentInput("molecule graph is disconnected")

    def _check_valence(self):
        for i, elem in enumerate(self.atoms):
            s = self.bond_order_sum(i)
            if s > elem.default_valence:
                raise ValenceExceeded(
                    f"atom {i} ({elem.symbol}) carries bond order {s} > {elem.default_valence}"
                )

    # -- basic accessors -----------------------------------------------

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> tuple[tuple[int, BondOrder], ...]:
        return self._adjacency[i]

    def degree(self, i: int) -> int:
        return len(self._adjacency[i])

    def heavy_indices(self) -> list[int]:
        return [i for i, a in enumerate(self.atoms) if a.symbol != "H"]

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.symbol != "H")

    def bond_order_sum(self, i: int) -> int:
        """Effective bond-order sum at atom i (aromatic sums are floored)."""
        s = 0.0
        aromatic = False
        for _, order in self._adjacency[i]:
            s += order.valence_contribution
            aromatic = aromatic or order is BondOrder.AROMATIC
        return int(s + 1e-9) if aromatic else int(round(s))

    def free_valence(self, i: int) -> int:
        s = self.bond_order_sum(i)
        return self.atoms[i].fill_valence(s) - s

    def is_expanded(self) -> bool:
        if self._is_expanded is None:
            self._is_expanded = all(
                self.free_valence(i) == 0 for i in range(self.n_atoms)
            )
        return self._is_expanded

    @property
    def canonical_form(self) -> str:
        """Canonical SMILES over the heavy-atom skeleton (cached)."""
        if self._canonical is None:
            self._canonical, self._canonical_heavy_order = _canonicalize(self)
        return self._canonical

    def canonical_heavy_order(self) -> tuple[int, ...]:
        """Heavy atom indices of this molecule in canonical emission order."""
        if self._canonical_heavy_order is None:
            self.canonical_form  # populates both caches
        return self._canonical_heavy_order

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Molecule({self.canonical_form!r}, atoms={self.n_atoms})"


def molecular_weight(mol: Molecule, mode: WeightMode) -> float:
    """Total matching weight m(M), strictly positive and atom-additive."""
    return float(sum(atom_weight(a, mode) for a in mol.atoms))


def bond_profile(mol: Molecule, atom_index: int) -> BondProfile:
    """Multiset of (order, sorted endpoint elements) over incident bonds."""
    if not (0 <= atom_index < mol.n_atoms):
        raise InvalidMolecule(f"atom index {atom_index} out of range")
    if mol._profiles is None:
        profiles = []
        for i in range(mol.n_atoms):
            sym_i = mol.atoms[i].symbol
            entries = []
            for j, order in mol.neighbors(i):
                sym_j = mol.atoms[j].symbol
                lo, hi = (sym_i, sym_j) if sym_i <= sym_j else (sym_j, sym_i)
                entries.append((order.symbol, lo, hi))
            profiles.append(BondProfile(tuple(sorted(entries))))
        mol._profiles = tuple(profiles)
    return mol._profiles[atom_index]


# ---------------------------------------------------------------------------
# SMILES parsing
# ---------------------------------------------------------------------------

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = frozenset("BCNOPSFI")
_AROMATIC_ONE = frozenset("bcnops")
_BOND_SYMBOLS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE,
                 "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC}


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a heavy-atom molecular graph.

    Supports branches, ring closures (``1``-``9``, ``%nn``), explicit
    bond symbols, lowercase aromatic atoms of the organic subset and
    bracket atoms without charge/isotope/H-count annotations.  Bonds
    between two aromatic atoms default to aromatic order.
    """
    if not text:
        raise UnknownToken("empty SMILES string")
    if not text.isascii():
        raise UnknownToken("SMILES must be ASCII")

    atoms: list[tuple[Element, bool]] = []  # (element, written-aromatic)
    bonds: dict[tuple[int, int], BondOrder] = {}
    prev: int | None = None
    pending: BondOrder | None = None
    branch_stack: list[int] = []
    ring_open: dict[int, tuple[int, BondOrder | None]] = {}

    def add_bond(i: int, j: int, order: BondOrder):
        if i == j:
            raise InvalidMolecule("ring closure bonds an atom to itself")
        key = (i, j) if i < j else (j, i)
        if key in bonds:
            raise InvalidMolecule(f"duplicate bond between atoms {key}")
        bonds[key] = order

    def add_atom(symbol: str, aromatic: bool):
        nonlocal prev, pending
        idx = len(atoms)
        atoms.append((PERIODIC_TABLE[symbol], aromatic))
        if prev is not None:
            order = pending
            if order is None:
                order = (BondOrder.AROMATIC
                         if atoms[prev][1] and aromatic else BondOrder.SINGLE)
            add_bond(prev, idx, order)
        elif pending is not None:
            raise UnknownToken("bond symbol before any atom")
        pending = None
        prev = idx

    def close_or_open_ring(number: int):
        nonlocal pending
        if prev is None:
            raise UnknownToken("ring-closure digit before any atom")
        if number in ring_open:
            other, other_bond = ring_open.pop(number)
            if pending is not None and other_bond is not None and pending is not other_bond:
                raise UnknownToken(f"conflicting bond symbols on ring closure {number}")
            order = pending or other_bond
            if order is None:
                order = (BondOrder.AROMATIC
                         if atoms[prev][1] and atoms[other][1] else BondOrder.SINGLE)
            add_bond(other, prev, order)
        else:
            ring_open[number] = (prev, pending)
        pending = None

    i = 0
    while i < len(text):
        c = text[i]
        if c == ".":
            raise MultiFragmentInput("dot-separated fragments are unsupported")
        if c == "(":
            if prev is None:
                raise UnbalancedBranch("branch opened before any atom")
            if pending is not None:
                raise UnknownToken("bond symbol directly before '('")
            branch_stack.append(prev)
            i += 1
            continue
        if c == ")":
            if pending is not None:
                raise UnknownToken("dangling bond symbol before ')'")
            if not branch_stack:
                raise UnbalancedBranch("unmatched ')'")
            prev = branch_stack.pop()
            i += 1
            continue
        if c in _BOND_SYMBOLS:
            if pending is not None:
                raise UnknownToken("two consecutive bond symbols")
            pending = _BOND_SYMBOLS[c]
            i += 1
            continue
        if c.isdigit():
            if c == "0":
                raise UnknownToken("ring-closure digit 0 is not valid")
            close_or_open_ring(int(c))
            i += 1
            continue
        if c == "%":
            digits = text[i + 1: i + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise UnknownToken("'%' ring closure needs two digits")
            close_or_open_ring(int(digits))
            i += 3
            continue
        if c == "[":
            end = text.find("]", i)
            if end < 0:
                raise UnknownToken("unterminated bracket atom")
            inner = text[i + 1: end]
            if inner == "H":
                raise UnknownToken("explicit hydrogen atoms are implicit in this dialect")
            if inner in PERIODIC_TABLE:
                add_atom(inner, aromatic=False)
            elif inner in _AROMATIC_ONE:
                add_atom(inner.upper(), aromatic=True)
            else:
                raise UnknownToken(
                    f"unsupported bracket atom '[{inner}]' (charges/isotopes/H-counts rejected)"
                )
            i = end + 1
            continue
        two = text[i: i + 2]
        if two in _ORGANIC_TWO:
            add_atom(two, aromatic=False)
            i += 2
            continue
        if c in _ORGANIC_ONE:
            add_atom(c, aromatic=False)
            i += 1
            continue
        if c in _AROMATIC_ONE:
            add_atom(c.upper(), aromatic=True)
            i += 1
            continue
        raise UnknownToken(f"unsupported token {c!r} at position {i}")

    if branch_stack:
        raise UnbalancedBranch("unclosed '('")
    if ring_open:
        raise UnclosedRing(f"unclosed ring closures: {sorted(ring_open)}")
    if pending is not None:
        raise UnknownToken("dangling bond symbol at end of input")
    return Molecule([elem for elem, _ in atoms], bonds)


# ---------------------------------------------------------------------------
# Hydrogen expansion
# ---------------------------------------------------------------------------


def add_explicit_hydrogens(mol: Molecule) -> Molecule:
    """Fill each atom's free valence with explicit single-bonded hydrogens.

    Sulfur fills to the smallest of its standard valences (2, 4, 6) that
    covers the current bond sum; aromatic atoms use the floored bond-order
    sum.  Idempotent: an already expanded molecule is returned unchanged.
    """
    if mol._expanded is not None:
        return mol._expanded
    counts = []
    for i, elem in enumerate(mol.atoms):
        s = mol.bond_order_sum(i)
        target = elem.fill_valence(s)
        if target < 0:
            raise ValenceExceeded(f"atom {i} ({elem.symbol}) has negative free valence")
        counts.append(target - s)
    if not any(counts):
        mol._expanded = mol
        return mol
    atoms = list(mol.atoms)
    bonds = dict(mol.bonds)
    hydrogen = PERIODIC_TABLE["H"]
    for i, extra in enumerate(counts):
        for _ in range(extra):
            atoms.append(hydrogen)
            bonds[(i, len(atoms) - 1)] = BondOrder.SINGLE
    out = Molecule(atoms, bonds)
    out._expanded = out
    mol._expanded = out
    return out


def strip_hydrogens(mol: Molecule) -> Molecule:
    """Heavy-atom skeleton of a molecule (inverse of hydrogen expansion)."""
    heavy = mol.heavy_indices()
    if len(heavy) == mol.n_atoms:
        return mol
    if not heavy:
        raise InvalidMolecule("molecule has no heavy atoms")
    remap = {old: new for new, old in enumerate(heavy)}
    bonds = {
        (remap[i], remap[j]): order
        for (i, j), order in mol.bonds.items()
        if i in remap and j in remap
    }
    return Molecule([mol.atoms[i] for i in heavy], bonds)


# ---------------------------------------------------------------------------
# Canonical ordering and SMILES emission
# ---------------------------------------------------------------------------

# Safety valve for the tie-breaking search; realistic molecules stay far
# below it (each branch fixes one atom of an automorphism orbit).
_MAX_TIE_LEAVES = 4096


def _dense_ranks(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(ranks: list[int], adj: list[list[tuple[int, int]]]) -> list[int]:
    n = len(ranks)
    n_classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((br, ranks[j]) for j, br in adj[i])))
            for i in range(n)
        ]
        new_ranks = _dense_ranks(keys)
        new_classes = len(set(new_ranks))
        if new_classes == n_classes:
            return new_ranks
        ranks, n_classes = new_ranks, new_classes


def _canonicalize(mol: Molecule) -> tuple[str, tuple[int, ...]]:
    heavy = mol.heavy_indices()
    if not heavy:
        raise InvalidMolecule("cannot canonicalize a molecule with no heavy atoms")
    remap = {old: new for new, old in enumerate(heavy)}
    n = len(heavy)
    symbols = [mol.atoms[i].symbol for i in heavy]
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    orders: dict[tuple[int, int], BondOrder] = {}
    for (i, j), order in mol.bonds.items():
        if i in remap and j in remap:
            a, b = remap[i], remap[j]
            adj[a].append((b, _BOND_RANK[order]))
            adj[b].append((a, _BOND_RANK[order]))
            orders[(min(a, b), max(a, b))] = order
    aromatic = [
        any(br == _BOND_RANK[BondOrder.AROMATIC] for _, br in adj[i])
        for i in range(n)
    ]

    if len(orders) == n - 1:
        # Acyclic skeleton: rooted-subtree canonization, near-linear and
        # exact (refinement ties in trees are automorphism orbits anyway).
        s, order = _emit_tree(n, symbols, adj, orders, aromatic)
        return s, tuple(heavy[i] for i in order)

    seed = [
        (symbols[i], len(adj[i]), tuple(sorted(br for _, br in adj[i])))
        for i in range(n)
    ]
    ranks = _refine(_dense_ranks(seed), adj)

    best: list = [None, None]  # (string, emission order)
    budget = [_MAX_TIE_LEAVES]

    def search(ranks: list[int]):
        if budget[0] <= 0:
            return
        if len(set(ranks)) == n:
            budget[0] -= 1
            s, order = _emit(n, symbols, adj, orders, aromatic, ranks)
            if best[0] is None or s < best[0]:
                best[0], best[1] = s, order
            return
        counts = Counter(ranks)
        split_rank = min(r for r, c in counts.items() if c > 1)
        members = [i for i in range(n) if ranks[i] == split_rank]
        for m in members:
            bumped = [2 * r for r in ranks]
            bumped[m] -= 1
            search(_refine(_dense_ranks(bumped), adj))

    search(ranks)
    order = tuple(heavy[i] for i in best[1])
    return best[0], order


def _token_helpers(symbols, aromatic, orders):
    def atom_token(u: int) -> str:
        sym = symbols[u]
        if aromatic[u] and sym in _AROMATIC_WRITABLE:
            return sym.lower()
        return sym

    def bond_token(a: int, b: int) -> str:
        order = orders[(min(a, b), max(a, b))]
        both_lower = (
            aromatic[a] and symbols[a] in _AROMATIC_WRITABLE
            and aromatic[b] and symbols[b] in _AROMATIC_WRITABLE
        )
        default = BondOrder.AROMATIC if both_lower else BondOrder.SINGLE
        return "" if order is default else order.symbol

    return atom_token, bond_token


def _emit_tree(n, symbols, adj, orders, aromatic):
    """Canonical SMILES of an acyclic heavy graph via rooted-subtree
    codes (root at the tree center; children sorted by subtree code)."""
    atom_token, bond_token = _token_helpers(symbols, aromatic, orders)
    if n == 1:
        return atom_token(0), [0]
    nbrs = [[j for j, _ in a] for a in adj]

    # Tree center(s) by repeated leaf stripping.
    degree = [len(x) for x in nbrs]
    removed = [False] * n
    layer = [i for i in range(n) if degree[i] <= 1]
    remaining = n
    while remaining > 2:
        for u in layer:
            removed[u] = True
        remaining -= len(layer)
        nxt = []
        for u in layer:
            for v in nbrs[u]:
                if not removed[v]:
                    degree[v] -= 1
                    if degree[v] == 1:
                        nxt.append(v)
        layer = nxt
    centers = [i for i in range(n) if not removed[i]]

    def edge_key(a: int, b: int) -> str:
        return str(_BOND_RANK[orders[(min(a, b), max(a, b))]])

    code_memo: dict[tuple[int, int], str] = {}

    def code(v: int, p: int) -> str:
        key = (v, p)
        got = code_memo.get(key)
        if got is None:
            kids = sorted(edge_key(v, c) + code(c, v) for c in nbrs[v] if c != p)
            got = atom_token(v) + "(" + ",".join(kids) + ")"
            code_memo[key] = got
        return got

    root = min(centers, key=lambda c: code(c, -1))

    out: list[str] = []
    order: list[int] = []

    def write(v: int, p: int):
        order.append(v)
        out.append(atom_token(v))
        kids = sorted(
            (edge_key(v, c) + code(c, v), c) for c in nbrs[v] if c != p
        )
        for k, (_, c) in enumerate(kids):
            last = k == len(kids) - 1
            if not last:
                out.append("(")
            out.append(bond_token(v, c))
            write(c, v)
            if not last:
                out.append(")")

    write(root, -1)
    return "".join(out), order


def _emit(n, symbols, adj, orders, aromatic, ranks):
    """Emit a SMILES string for a totally ranked heavy graph.

    DFS starts at the rank-0 atom and visits neighbors in rank order;
    back edges become ring closures numbered in order of first use, with
    digits reused once closed.  Returns the string and the visit order.
    """
    start = min(range(n), key=lambda i: ranks[i])
    nbr_order = [sorted((j for j, _ in adj[i]), key=lambda j: ranks[j]) for i in range(n)]

    visited = [False] * n
    visit_pos = [-1] * n
    visit_seq: list[int] = []
    tree: list[list[int]] = [[] for _ in range(n)]
    ring_edges: list[tuple[int, int]] = []  # (first-visited, second) endpoints
    seen_edges: set[tuple[int, int]] = set()

    def explore(u: int):
        visited[u] = True
        visit_pos[u] = len(visit_seq)
        visit_seq.append(u)
        for v in nbr_order[u]:
            key = (min(u, v), max(u, v))
            if key in seen_edges:
                continue
            seen_edges.add(key)
            if visited[v]:
                a, b = (u, v) if visit_pos[u] < visit_pos[v] else (v, u)
                ring_edges.append((a, b))
            else:
                tree[u].append(v)
                explore(v)

    explore(start)

    ring_edges.sort(key=lambda e: (visit_pos[e[0]], visit_pos[e[1]]))
    opens: dict[int, list[tuple[int, int]]] = {}
    closes: dict[int, list[tuple[int, int]]] = {}
    for a, b in ring_edges:
        opens.setdefault(a, []).append((a, b))
        closes.setdefault(b, []).append((a, b))

    digit_of: dict[tuple[int, int], int] = {}
    free_digits = list(range(1, 100))
    atom_token, bond_token = _token_helpers(symbols, aromatic, orders)

    def digit_token(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    out: list[str] = []

    def write(u: int):
        out.append(atom_token(u))
        for edge in opens.get(u, []):
            if not free_digits:
                raise InvalidMolecule("too many simultaneous ring closures")
            d = free_digits.pop(0)
            digit_of[edge] = d
            out.append(bond_token(*edge) + digit_token(d))
        for edge in closes.get(u, []):
            d = digit_of.pop(edge)
            out.append(digit_token(d))
            free_digits.append(d)
            free_digits.sort()
        children = tree[u]
        for k, v in enumerate(children):
            last = k == len(children) - 1
            if not last:
                out.append("(")
            out.append(bond_token(u, v))
            write(v)
            if not last:
                out.append(")")

    write(start)
    return "".join(out), visit_seq


def canonical_form(mol: Molecule) -> str:
    """Canonical text form of a molecule (heavy-atom canonical SMILES)."""
    return mol.canonical_form


def write_smiles(mol: Molecule) -> str:
    """Deterministic SMILES over heavy atoms; re-parsing preserves the
    canonical form."""
    return mol.canonical_form


# ---------------------------------------------------------------------------
# Pool files
# ---------------------------------------------------------------------------


def load_pool(path) -> list[Molecule]:
    """Read a molecule pool file: one SMILES per line, ``#`` comments and
    blank lines ignored."""
    molecules = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            molecules.append(parse_smiles(line))
    return molecules
