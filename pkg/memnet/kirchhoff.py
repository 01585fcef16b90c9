"""
Per-time-step DC solve of the lattice

Each unit contributes the conductance of its closed-switch devices between
its endpoints. The sink is pinned at v_sink, the source at v_sink + v_applied,
and the remaining potentials of the connected component holding both
terminals solve the reduced (SPD) weighted-Laplacian system. Nodes outside
that component sit at 0 V and carry no current.

The reduced matrix is B^T G B over a fixed incidence matrix B. A
KirchhoffSolver built once per run keeps its sparsity pattern and only
refills the entries at every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from memnet.errors import NoCircuitError, SolverError
from memnet.lattice import Lattice, Node, UnitId

RESIDUAL_TOLERANCE = 1e-10
# Largest reduced system solved dense; the 11x11 grid has 119 unknowns
DENSE_LIMIT = 400


def unit_conductances(x: np.ndarray, closed: np.ndarray) -> np.ndarray:
    return np.where(closed, 1.0 / x, 0.0).sum(axis=1)


@dataclass(frozen=True)
class ConductanceSystem:
    """Weighted Laplacian over the nodes touched by at least one conducting unit"""

    matrix: sparse.csr_matrix
    nodes: tuple[Node, ...]
    unit_count: int

    @cached_property
    def index(self) -> dict[Node, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    @property
    def dimension(self) -> int:
        return len(self.nodes)


def assemble_conductance(l: Lattice) -> ConductanceSystem:
    """Symmetric weighted Laplacian of the live, non-isolated nodes"""
    g = unit_conductances(l.x, l.closed)
    conducting = g > 0
    ends = l.endpoints[conducting]
    g = g[conducting]
    used = np.unique(ends) if len(ends) else np.zeros(0, dtype=int)
    position = {int(flat): i for i, flat in enumerate(used)}
    a = np.array([position[int(i)] for i in ends[:, 0]], dtype=int)
    b = np.array([position[int(i)] for i in ends[:, 1]], dtype=int)
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    data = np.concatenate([g, g, -g, -g])
    n = len(used)
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    return ConductanceSystem(matrix=matrix, nodes=tuple(l.node_at(i) for i in used), unit_count=int(conducting.sum()))


@dataclass(frozen=True)
class SolveResult:
    """Node potentials and device branch currents of one DC solve"""

    node_potentials: np.ndarray
    branch_currents: np.ndarray
    total_current: float
    residual: float
    cols: int
    unit_ids: tuple[UnitId, ...]
    removed_nodes: frozenset[Node]

    @cached_property
    def potentials(self) -> dict[Node, float]:
        out = {}
        for flat, value in enumerate(self.node_potentials):
            node = divmod(flat, self.cols)
            if node not in self.removed_nodes:
                out[node] = float(value)
        return out

    @cached_property
    def device_currents(self) -> dict[tuple[UnitId, int], float]:
        """(unit id, slot) -> device current in the unit's a->b direction"""
        return {(uid, slot): float(self.branch_currents[k, slot])
                for k, uid in enumerate(self.unit_ids) for slot in (0, 1)}

    @property
    def unit_currents(self) -> np.ndarray:
        return self.branch_currents.sum(axis=1)


class KirchhoffSolver:
    """
    Topology of one lattice, prepared once for repeated solves.

    The reduced matrix B^T diag(g) B keeps one sparsity pattern for the whole
    run, so its structure and the (entries x units) map from unit conductances
    to matrix entries are built here; a solve only fills in the numbers.
    Systems with at most dense_limit unknowns use a dense Cholesky solve,
    larger ones the sparse LU solve on the fixed CSC pattern.
    """

    def __init__(self, lattice: Lattice, dense_limit: int = DENSE_LIMIT):
        self.lattice = lattice
        l = lattice
        src, snk = l.flat(l.source), l.flat(l.sink)
        ends = l.endpoints
        conducting = l.closed.any(axis=1)

        # Connected component of the source over conducting units
        adjacency = sparse.coo_matrix(
            (np.ones(int(conducting.sum())), (ends[conducting, 0], ends[conducting, 1])),
            shape=(l.n_nodes, l.n_nodes),
        )
        _, labels = connected_components(adjacency, directed=False)
        if not conducting.any() or labels[src] != labels[snk]:
            raise NoCircuitError(f"no conducting path between source {l.source} and sink {l.sink}")

        self.active_units = np.flatnonzero(conducting & (labels[ends[:, 0]] == labels[src]))
        component = np.flatnonzero(labels == labels[src])
        self.unknowns = np.array([i for i in component if i not in (src, snk)], dtype=int)
        self.src, self.snk = src, snk
        self.removed_flat = np.array(sorted(l.flat(n) for n in l.removed_nodes), dtype=int)
        self.leaves_source = ends[:, 0] == src
        self.enters_source = ends[:, 1] == src

        column = np.full(l.n_nodes, -1)
        column[self.unknowns] = np.arange(len(self.unknowns))
        active_ends = ends[self.active_units]
        self.active_ends = active_ends

        # Signed incidence restricted to unknown nodes (B) and to the terminals (B_f)
        n_active = len(self.active_units)
        n = len(self.unknowns)
        entries = []
        fixed = np.zeros((n_active, 2))
        for row, (a, b) in enumerate(active_ends):
            for node, sign in ((a, 1.0), (b, -1.0)):
                if column[node] >= 0:
                    entries.append((row, column[node], sign))
                elif node == src:
                    fixed[row, 0] = sign
                else:
                    fixed[row, 1] = sign
        if entries:
            r, c, s = (np.array(v) for v in zip(*entries))
        else:
            r, c, s = np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0)
        self.incidence = sparse.csr_matrix((s, (r, c)), shape=(n_active, n))
        self.incidence_t = self.incidence.T.tocsr()
        self.fixed_incidence = fixed

        # Every unit k adds g_k * s_i * s_j at (c_i, c_j) for each pair of its unknown ends
        units, cols_i, cols_j, signs = [], [], [], []
        for k in range(n_active):
            start, stop = self.incidence.indptr[k], self.incidence.indptr[k + 1]
            for p in range(start, stop):
                for q in range(start, stop):
                    units.append(k)
                    cols_i.append(self.incidence.indices[p])
                    cols_j.append(self.incidence.indices[q])
                    signs.append(self.incidence.data[p] * self.incidence.data[q])
        cols_i, cols_j = np.array(cols_i, dtype=np.int64), np.array(cols_j, dtype=np.int64)
        # column-major keys sort into canonical CSC order
        keys, slot = np.unique(cols_j * n + cols_i, return_inverse=True)
        self.stamp = sparse.csr_matrix((signs, (slot, units)), shape=(len(keys), n_active))
        self.pattern_cols, self.pattern_rows = np.divmod(keys, max(n, 1))
        self.pattern_indptr = np.searchsorted(self.pattern_cols, np.arange(n + 1))
        self.dense = n <= dense_limit

    def reduced_matrix(self, g: np.ndarray):
        """Reduced Laplacian at active-unit conductances g (dense array or CSC matrix)"""
        n = len(self.unknowns)
        data = self.stamp @ g
        if self.dense:
            matrix = np.zeros((n, n))
            matrix[self.pattern_rows, self.pattern_cols] = data
            return matrix
        return sparse.csc_matrix((data, self.pattern_rows, self.pattern_indptr), shape=(n, n))

    def solve(self, x: np.ndarray, v_applied: float, v_sink: float = 0.0) -> SolveResult:
        """
        Solve for potentials and device currents at device states x.

        Args:
            x: (n_units, 2) memristances for the solver's lattice topology
            v_applied: source potential minus sink potential
            v_sink: sink potential

        Returns:
            SolveResult with the terminals at their pinned values
        """
        l = self.lattice
        closed = l.closed
        g = unit_conductances(x, closed)[self.active_units]
        boundary = np.array([v_sink + v_applied, v_sink])

        phi = np.zeros(l.n_nodes)
        phi[self.src], phi[self.snk] = boundary
        residual = 0.0
        if len(self.unknowns):
            reduced = self.reduced_matrix(g)
            rhs = -(self.incidence_t @ (g * (self.fixed_incidence @ boundary)))
            try:
                if self.dense:
                    solution = scipy.linalg.solve(reduced, rhs, assume_a='pos', check_finite=False)
                else:
                    solution = np.atleast_1d(spsolve(reduced, rhs))
            except np.linalg.LinAlgError as e:
                raise SolverError('reduced matrix is not positive definite', {
                    'unknowns': len(self.unknowns), 'detail': str(e)}) from None
            if not np.all(np.isfinite(solution)):
                raise SolverError('non-finite node potentials', {
                    'unknowns': len(self.unknowns), 'min_g': float(g.min()), 'max_g': float(g.max())})
            applied = reduced @ solution
            scale = max(np.linalg.norm(rhs), np.linalg.norm(applied), 1e-300)
            residual = float(np.linalg.norm(applied - rhs) / scale)
            if residual > RESIDUAL_TOLERANCE:
                raise SolverError('residual above tolerance', {'residual': residual, 'tolerance': RESIDUAL_TOLERANCE})
            phi[self.unknowns] = solution

        phi[self.removed_flat] = np.nan

        drop = np.zeros(l.n_units)
        drop[self.active_units] = phi[self.active_ends[:, 0]] - phi[self.active_ends[:, 1]]
        currents = np.where(closed, drop[:, None] / x, 0.0)

        unit_total = currents.sum(axis=1)
        total = float(unit_total[self.leaves_source].sum() - unit_total[self.enters_source].sum())
        return SolveResult(phi, currents, total, residual, l.cols, l.unit_ids, l.removed_nodes)


def solve_potentials(l: Lattice, v_applied: float, v_sink: float = 0.0) -> SolveResult:
    """One-off DC solve of lattice l with the source held v_applied above the sink"""
    return KirchhoffSolver(l).solve(l.x, v_applied, v_sink)


def cross_section_currents(sr: SolveResult, l: Lattice, col_boundary: int) -> list[float]:
    """Signed current (toward increasing column) through each row's horizontal unit at a cut"""
    if not (0 <= col_boundary < l.cols - 1):
        raise ValueError(f"cut boundary {col_boundary} outside [0, {l.cols - 2}]")
    unit_currents = sr.unit_currents
    out = []
    for row in range(l.rows):
        k = l.unit_index.get(l.horizontal_unit(row, col_boundary))
        out.append(float(unit_currents[k]) if k is not None else 0.0)
    return out
