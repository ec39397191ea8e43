"""Optimal-transport dissimilarity between molecules.

The measure matches atom weight across two hydrogen-expanded molecules.
Matched weight pays an element-mismatch penalty plus a bond-environment
penalty (one minus the multiset-Jaccard overlap of the two atoms' bond
profiles); unmatched weight pays one per unit on each side.  The
original inequality-constrained program is solved exactly in its
balanced-transportation reformulation: each side gains a sink node whose
supply/demand is the other molecule's total weight, penalty cells cost
one, and the sink-sink corner costs zero.

The element-mismatch penalty is the finite constant ``MISMATCH_PENALTY``
rather than infinity: leaving one unit unmatched on both sides costs 2,
so any finite penalty above 2 keeps mismatched elements out of optimal
plans while the program stays well posed.

Atoms with equal (element, bond profile) are interchangeable for this
cost structure, so the solver aggregates them into classes and solves a
much smaller transportation problem; returned plans are expanded back to
atom level by uniform splitting, which preserves feasibility and cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMolecule, SolverFailure
from .molgraph import Molecule, WeightMode, bond_profile

MISMATCH_PENALTY = 10.0


@dataclass(frozen=True)
class DistanceConfig:
    weight_mode: WeightMode
    normalize: bool

    @property
    def label(self) -> str:
        return f"{self.weight_mode.value}_{'norm' if self.normalize else 'raw'}"


#: The four weight/normalization combinations, in fixed reporting order.
CONFIG_ORDER: tuple[DistanceConfig, ...] = (
    DistanceConfig(WeightMode.UNIT, False),
    DistanceConfig(WeightMode.UNIT, True),
    DistanceConfig(WeightMode.MASS, False),
    DistanceConfig(WeightMode.MASS, True),
)


@dataclass(frozen=True)
class CostMatrices:
    """Atom-level penalty matrices: element mismatch and bond-profile
    dissimilarity (the latter bounded in [0, 1])."""

    c_lbl: np.ndarray
    c_str: np.ndarray


@dataclass(frozen=True)
class TransportPlan:
    """Transport plan over (n1+1) x (n2+1) cells; the last row/column are
    the non-matching sinks.  ``cost`` is the raw optimal objective."""

    u: np.ndarray
    cost: float


# ---------------------------------------------------------------------------
# Atom classes: aggregation of interchangeable atoms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _AtomClasses:
    symbols: tuple[str, ...]
    masses: np.ndarray            # per-class atomic mass
    counts: np.ndarray            # per-class member count
    members: tuple[tuple[int, ...], ...]
    profile_counts: np.ndarray    # (k, vocab) entry counts
    profile_sizes: np.ndarray     # per-class profile cardinality
    vocab: dict[tuple[str, str, str], int]
    atom_class: np.ndarray        # per-atom class index


def _atom_classes(mol: Molecule) -> _AtomClasses:
    cached = mol._transport_classes.get("classes")
    if cached is not None:
        return cached
    groups: dict[tuple, list[int]] = {}
    for i in range(mol.n_atoms):
        key = (mol.atoms[i].symbol, bond_profile(mol, i).entries)
        groups.setdefault(key, []).append(i)
    keys = sorted(groups)
    vocab: dict[tuple[str, str, str], int] = {}
    for sym, entries in keys:
        for e in entries:
            vocab.setdefault(e, len(vocab))
    k = len(keys)
    counts_mat = np.zeros((k, max(1, len(vocab))))
    sizes = np.zeros(k)
    masses = np.zeros(k)
    counts = np.zeros(k)
    atom_class = np.zeros(mol.n_atoms, dtype=np.intp)
    members = []
    symbols = []
    for a, (sym, entries) in enumerate(keys):
        idxs = groups[(sym, entries)]
        members.append(tuple(idxs))
        symbols.append(sym)
        masses[a] = mol.atoms[idxs[0]].atomic_mass
        counts[a] = len(idxs)
        sizes[a] = len(entries)
        for e in entries:
            counts_mat[a, vocab[e]] += 1.0
        atom_class[idxs] = a
    out = _AtomClasses(
        symbols=tuple(symbols),
        masses=masses,
        counts=counts,
        members=tuple(members),
        profile_counts=counts_mat,
        profile_sizes=sizes,
        vocab=vocab,
        atom_class=atom_class,
    )
    mol._transport_classes["classes"] = out
    return out


def _class_costs(c1: _AtomClasses, c2: _AtomClasses) -> tuple[np.ndarray, np.ndarray]:
    """Class-level (c_lbl, c_str) matrices."""
    sym1 = np.array(c1.symbols, dtype=object)
    sym2 = np.array(c2.symbols, dtype=object)
    c_lbl = np.where(sym1[:, None] == sym2[None, :], 0.0, MISMATCH_PENALTY)

    # Align both profile-count matrices on a shared entry vocabulary.
    shared = dict(c1.vocab)
    for e in c2.vocab:
        shared.setdefault(e, len(shared))
    v = len(shared)
    a1 = np.zeros((len(c1.symbols), v))
    cols1 = [shared[e] for e in c1.vocab]
    a1[:, cols1] = c1.profile_counts[:, list(c1.vocab.values())]
    a2 = np.zeros((len(c2.symbols), v))
    cols2 = [shared[e] for e in c2.vocab]
    a2[:, cols2] = c2.profile_counts[:, list(c2.vocab.values())]

    inter = np.minimum(a1[:, None, :], a2[None, :, :]).sum(axis=2)
    union = c1.profile_sizes[:, None] + c2.profile_sizes[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        c_str = np.where(union > 0, 1.0 - inter / np.where(union > 0, union, 1.0), 0.0)
    return c_lbl, c_str


def _require_expanded(mol: Molecule):
    if not mol.is_expanded():
        raise InvalidMolecule(
            "distance computations require hydrogen-expanded molecules"
        )


def build_costs(m1: Molecule, m2: Molecule) -> CostMatrices:
    """Atom-level cost matrices between two hydrogen-expanded molecules.

    ``c_lbl`` is 0 for equal elements and MISMATCH_PENALTY otherwise;
    ``c_str(i, j) = 1 - |P_i n P_j| / |P_i u P_j|`` over the atoms' bond
    profiles (multiset min/max), and 0 when both profiles are empty.
    """
    _require_expanded(m1)
    _require_expanded(m2)
    cl1, cl2 = _atom_classes(m1), _atom_classes(m2)
    c_lbl, c_str = _class_costs(cl1, cl2)
    ix = np.ix_(cl1.atom_class, cl2.atom_class)
    return CostMatrices(c_lbl=c_lbl[ix], c_str=c_str[ix])


# ---------------------------------------------------------------------------
# Exact transportation simplex
# ---------------------------------------------------------------------------

_REDUCED_COST_TOL = 1e-10


def solve_transport(
    supply: np.ndarray, demand: np.ndarray, cost: np.ndarray
) -> tuple[float, np.ndarray]:
    """Exact primal simplex for the balanced transportation problem.

    Minimizes ``<X, cost>`` subject to row sums equal to ``supply``,
    column sums equal to ``demand`` and ``X >= 0``.  Entering variables
    follow the most-negative reduced cost with first-index ties; if the
    pivot budget is exceeded the rule switches to Bland's (first negative
    in row-major order), which cannot cycle.  Raises SolverFailure only
    if even that fails to terminate.
    """
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    total = supply.sum()
    if abs(total - demand.sum()) > 1e-7 * max(1.0, total):
        raise SolverFailure("unbalanced transportation problem")
    if np.any(supply < -1e-12) or np.any(demand < -1e-12):
        raise SolverFailure("negative supply or demand")

    x = np.zeros((n, m))
    row_basis: list[set[int]] = [set() for _ in range(n)]
    col_basis: list[set[int]] = [set() for _ in range(m)]

    # Minimum-cost initial basic feasible solution: repeatedly fill the
    # cheapest cell among active rows/columns, deactivating exactly one
    # node per step.  That yields n+m-1 basic cells (degenerate zeros
    # included) that provably form a spanning tree, and usually starts
    # at or very close to the optimum.
    s = supply.copy()
    d = demand.copy()
    by_cost = np.argsort(cost, axis=None, kind="stable")
    row_active = [True] * n
    col_active = [True] * m
    rows_left = n
    cols_left = m
    ptr = 0
    while True:
        flat = int(by_cost[ptr])
        i, j = divmod(flat, m)
        if not (row_active[i] and col_active[j]):
            ptr += 1
            continue
        q = min(s[i], d[j])
        x[i, j] = q
        row_basis[i].add(j)
        col_basis[j].add(i)
        s[i] -= q
        d[j] -= q
        if rows_left == 1 and cols_left == 1:
            break
        if rows_left == 1 or (cols_left > 1 and s[i] > d[j]):
            col_active[j] = False
            cols_left -= 1
        else:
            row_active[i] = False
            rows_left -= 1

    u = np.empty(n)
    v = np.empty(m)
    tol = _REDUCED_COST_TOL * max(1.0, float(np.abs(cost).max()))
    bland_after = 60 * (n + m) + 500
    hard_cap = bland_after * 40 + 20000

    for pivot in range(hard_cap + 1):
        # Duals from the spanning-tree basis (u[0] anchored at zero).
        u_known = np.zeros(n, dtype=bool)
        v_known = np.zeros(m, dtype=bool)
        u[0] = 0.0
        u_known[0] = True
        stack = [(0, True)]
        while stack:
            node, is_row = stack.pop()
            if is_row:
                for jj in row_basis[node]:
                    if not v_known[jj]:
                        v[jj] = cost[node, jj] - u[node]
                        v_known[jj] = True
                        stack.append((jj, False))
            else:
                for ii in col_basis[node]:
                    if not u_known[ii]:
                        u[ii] = cost[ii, node] - v[node]
                        u_known[ii] = True
                        stack.append((ii, True))

        reduced = cost - u[:, None] - v[None, :]
        if pivot < bland_after:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                break
        else:
            negatives = np.flatnonzero(reduced.ravel() < -tol)
            if negatives.size == 0:
                break
            flat = int(negatives[0])
        ei, ej = divmod(flat, m)

        # Unique tree path from row ei to column ej; the entering cell
        # closes the cycle.  Walking from the column end, flows alternate
        # -, +, -, ... along the path.
        parent: dict[tuple[int, bool], tuple[int, bool] | None] = {(ei, True): None}
        stack = [(ei, True)]
        found = False
        while stack and not found:
            node, is_row = stack.pop()
            if is_row:
                for jj in row_basis[node]:
                    key = (jj, False)
                    if key not in parent:
                        parent[key] = (node, True)
                        if jj == ej:
                            found = True
                            break
                        stack.append(key)
            else:
                for ii in col_basis[node]:
                    key = (ii, True)
                    if key not in parent:
                        parent[key] = (node, False)
                        stack.append(key)
        if not found:
            raise SolverFailure("basis lost tree structure")

        path_cells: list[tuple[int, int]] = []
        node = (ej, False)
        while parent[node] is not None:
            pnode = parent[node]
            if node[1]:  # row node; edge to parent column
                path_cells.append((node[0], pnode[0]))
            else:
                path_cells.append((pnode[0], node[0]))
            node = pnode

        minus_cells = path_cells[0::2]
        theta = min(x[c] for c in minus_cells)
        leaving = next(c for c in minus_cells if x[c] <= theta)
        for k, c in enumerate(path_cells):
            x[c] += theta if k % 2 else -theta
        x[ei, ej] = theta
        row_basis[ei].add(ej)
        col_basis[ej].add(ei)
        row_basis[leaving[0]].discard(leaving[1])
        col_basis[leaving[1]].discard(leaving[0])
        x[leaving] = 0.0
    else:
        raise SolverFailure("transportation simplex exceeded its pivot budget")

    return float(np.sum(x * cost)), x


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def _sink_costs(cl1: _AtomClasses, cl2: _AtomClasses) -> np.ndarray:
    c_lbl, c_str = _class_costs(cl1, cl2)
    k1, k2 = c_lbl.shape
    c_full = np.ones((k1 + 1, k2 + 1))
    c_full[:k1, :k2] = c_lbl + c_str
    c_full[k1, k2] = 0.0
    return c_full


def _marginals(cl1: _AtomClasses, cl2: _AtomClasses, mode: WeightMode):
    k1, k2 = len(cl1.symbols), len(cl2.symbols)
    if mode is WeightMode.UNIT:
        w1, w2 = np.ones(k1), np.ones(k2)
    else:
        w1, w2 = cl1.masses, cl2.masses
    supply = cl1.counts * w1
    demand = cl2.counts * w2
    m1 = float(supply.sum())
    m2 = float(demand.sum())
    return np.append(supply, m2), np.append(demand, m1), m1, m2


def _solve_class_pair(m1: Molecule, m2: Molecule, mode: WeightMode):
    cl1, cl2 = _atom_classes(m1), _atom_classes(m2)
    c_full = _sink_costs(cl1, cl2)
    y1, y2, t1, t2 = _marginals(cl1, cl2, mode)
    cost, plan = solve_transport(y1, y2, c_full)
    return cost, plan, cl1, cl2, t1, t2


def solve_ot(
    m1: Molecule, m2: Molecule, cfg: DistanceConfig
) -> tuple[float, TransportPlan]:
    """Solve the transport reformulation exactly for one configuration.

    Returns the dissimilarity (divided by the summed total weights when
    ``cfg.normalize``) and the atom-level transport plan, whose row sums
    equal ``[w(a) for a in A1, m(M2)]`` and column sums equal
    ``[w(a) for a in A2, m(M1)]``.
    """
    _require_expanded(m1)
    _require_expanded(m2)
    cost, class_plan, cl1, cl2, t1, t2 = _solve_class_pair(m1, m2, cfg.weight_mode)
    n1, n2 = m1.n_atoms, m2.n_atoms
    k1, k2 = len(cl1.symbols), len(cl2.symbols)
    u = np.zeros((n1 + 1, n2 + 1))
    for a in range(k1):
        rows = list(cl1.members[a])
        for b in range(k2):
            f = class_plan[a, b]
            if f > 0.0:
                cols = cl2.members[b]
                u[np.ix_(rows, cols)] = f / (len(rows) * len(cols))
        f = class_plan[a, k2]
        if f > 0.0:
            u[rows, n2] = f / len(rows)
    for b in range(k2):
        f = class_plan[k1, b]
        if f > 0.0:
            cols = list(cl2.members[b])
            u[n1, cols] = f / len(cols)
    u[n1, n2] = class_plan[k1, k2]
    distance = cost / (t1 + t2) if cfg.normalize else cost
    return float(distance), TransportPlan(u=u, cost=float(cost))


def distance_vector(m1: Molecule, m2: Molecule) -> np.ndarray:
    """The four dissimilarities in fixed order:
    [unit/raw, unit/normalized, mass/raw, mass/normalized]."""
    _require_expanded(m1)
    _require_expanded(m2)
    if m1.canonical_form == m2.canonical_form:
        return np.zeros(4)
    cl1, cl2 = _atom_classes(m1), _atom_classes(m2)
    c_full = _sink_costs(cl1, cl2)  # shared by both weight modes
    out = np.empty(4)
    y1, y2, t1, t2 = _marginals(cl1, cl2, WeightMode.UNIT)
    cost_u, _ = solve_transport(y1, y2, c_full)
    y1, y2, t1m, t2m = _marginals(cl1, cl2, WeightMode.MASS)
    cost_m, _ = solve_transport(y1, y2, c_full)
    out[0] = cost_u
    out[1] = cost_u / (t1 + t2)
    out[2] = cost_m
    out[3] = cost_m / (t1m + t2m)
    return out
