"""
Lattice topology

Square grid of nodes joined by basic units. A basic unit holds two devices
in parallel between adjacent nodes a and b: slot 0 (dev_plus) is oriented
a->b, slot 1 (dev_minus) b->a, each behind an ideal access switch.

Node ids are (row, col), 0-indexed, row-major. A unit id is the ordered node
pair (node_a, node_b) with node_a before node_b in row-major order.

Device states live in one (n_units, 2) array so a whole lattice can be
stepped at once; BasicUnit values are built on demand for inspection.
Every operation returns a new Lattice and leaves its input untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from memnet.memdevice import DeviceParams, DeviceState, MemState

Node = tuple[int, int]
UnitId = tuple[Node, Node]

PLUS, MINUS = 0, 1


@dataclass(frozen=True)
class BasicUnit:
    """Two antiparallel devices and their switches between adjacent nodes"""

    node_a: Node
    node_b: Node
    dev_plus: DeviceState
    dev_minus: DeviceState
    switch_closed: tuple[bool, bool] = (True, True)

    def __post_init__(self):
        if self.node_a == self.node_b:
            raise ValueError(f"unit endpoints must differ, got {self.node_a} twice")
        if self.dev_plus.orientation != 1 or self.dev_minus.orientation != -1:
            raise ValueError("dev_plus must have orientation +1 and dev_minus -1")

    @property
    def unit_id(self) -> UnitId:
        return (self.node_a, self.node_b)

    @property
    def devices(self) -> tuple[DeviceState, DeviceState]:
        return (self.dev_plus, self.dev_minus)


def unit_resistance(u: BasicUnit) -> float:
    """Parallel resistance of the closed-switch devices; math.inf if none are closed"""
    conductance = sum(1.0 / dev.x for dev, closed in zip(u.devices, u.switch_closed) if closed)
    if conductance == 0:
        return math.inf
    return 1.0 / conductance


def parallel_resistances(x: np.ndarray, closed: np.ndarray) -> np.ndarray:
    """Vectorised unit_resistance over (n_units, 2) state and switch arrays"""
    conductance = np.where(closed, 1.0 / x, 0.0).sum(axis=1)
    with np.errstate(divide='ignore'):
        return np.where(conductance > 0, 1.0 / conductance, np.inf)


@dataclass(frozen=True, eq=False)
class Lattice:
    """Grid nodes, basic units, damage set and terminal designation"""

    rows: int
    cols: int
    params: DeviceParams
    unit_ids: tuple[UnitId, ...]
    x: np.ndarray
    closed: np.ndarray
    source: Node
    sink: Node
    removed_nodes: frozenset[Node] = field(default_factory=frozenset)

    def __post_init__(self):
        n = len(self.unit_ids)
        if self.x.shape != (n, 2) or self.closed.shape != (n, 2):
            raise ValueError(f"state arrays must have shape ({n}, 2)")
        self.x.setflags(write=False)
        self.closed.setflags(write=False)

    # -- indexing ------------------------------------------------------------

    @property
    def n_units(self) -> int:
        return len(self.unit_ids)

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    def flat(self, node: Node) -> int:
        return node[0] * self.cols + node[1]

    def node_at(self, index: int) -> Node:
        return divmod(int(index), self.cols)

    def contains(self, node: Node) -> bool:
        return 0 <= node[0] < self.rows and 0 <= node[1] < self.cols

    @property
    def live_nodes(self) -> list[Node]:
        return [(r, c) for r in range(self.rows) for c in range(self.cols)
                if (r, c) not in self.removed_nodes]

    @cached_property
    def unit_index(self) -> dict[UnitId, int]:
        return {uid: k for k, uid in enumerate(self.unit_ids)}

    @cached_property
    def endpoints(self) -> np.ndarray:
        """(n_units, 2) flat node indices of node_a and node_b"""
        if not self.unit_ids:
            return np.zeros((0, 2), dtype=int)
        return np.array([[self.flat(a), self.flat(b)] for a, b in self.unit_ids], dtype=int)

    def unit(self, uid: UnitId) -> BasicUnit:
        k = self.unit_index[uid]
        return BasicUnit(
            node_a=uid[0],
            node_b=uid[1],
            dev_plus=DeviceState(float(self.x[k, PLUS]), 1),
            dev_minus=DeviceState(float(self.x[k, MINUS]), -1),
            switch_closed=(bool(self.closed[k, PLUS]), bool(self.closed[k, MINUS])),
        )

    @property
    def units(self) -> list[BasicUnit]:
        return [self.unit(uid) for uid in self.unit_ids]

    def unit_resistances(self) -> np.ndarray:
        return parallel_resistances(self.x, self.closed)

    def horizontal_unit(self, row: int, col: int) -> UnitId:
        return ((row, col), (row, col + 1))

    # -- copies --------------------------------------------------------------

    def replace(self, **changes) -> Lattice:
        fields = dict(
            rows=self.rows, cols=self.cols, params=self.params, unit_ids=self.unit_ids,
            x=self.x, closed=self.closed, source=self.source, sink=self.sink,
            removed_nodes=self.removed_nodes,
        )
        fields.update(changes)
        fields['x'] = np.array(fields['x'], dtype=float, copy=True)
        fields['closed'] = np.array(fields['closed'], dtype=bool, copy=True)
        return Lattice(**fields)

    def with_states(self, x: np.ndarray) -> Lattice:
        return self.replace(x=x)

    def same_topology(self, other: Lattice) -> bool:
        return (self.rows, self.cols, self.unit_ids, self.removed_nodes) == \
            (other.rows, other.cols, other.unit_ids, other.removed_nodes)


def _grid_unit_ids(rows: int, cols: int) -> tuple[UnitId, ...]:
    horizontal = [((r, c), (r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    vertical = [((r, c), (r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    return tuple(horizontal + vertical)


def _check_terminals(rows: int, cols: int, source: Node, sink: Node) -> None:
    for name, node in (('source', source), ('sink', sink)):
        if not (0 <= node[0] < rows and 0 <= node[1] < cols):
            raise ValueError(f"{name} {node} outside {rows}x{cols} grid")
    if source == sink:
        raise ValueError(f"source and sink must differ, both are {source}")


def _uniform(n_units: int, x0: float, p: DeviceParams) -> tuple[np.ndarray, np.ndarray]:
    if not (p.r_on <= x0 <= p.r_off):
        raise ValueError(f"x0={x0} outside [{p.r_on}, {p.r_off}]")
    return np.full((n_units, 2), float(x0)), np.ones((n_units, 2), dtype=bool)


def default_terminals(rows: int, cols: int) -> tuple[Node, Node]:
    """Middle row, opposite boundary columns"""
    return (rows // 2, 0), (rows // 2, cols - 1)


def build_grid(rows: int, cols: int, p: DeviceParams, x0: float,
               source: Node | None = None, sink: Node | None = None) -> Lattice:
    """
    Build an intact rows x cols lattice with every device at x0.

    Args:
        rows, cols: grid dimensions in nodes (both >= 2)
        p: device constants
        x0: initial memristance of every device
        source, sink: terminal nodes (default: middle row, opposite edges)

    Returns:
        Lattice with rows*(cols-1) + (rows-1)*cols units, all switches closed
    """
    if rows < 2 or cols < 2:
        raise ValueError(f"grid must be at least 2x2, got {rows}x{cols}")
    default_source, default_sink = default_terminals(rows, cols)
    source = tuple(source) if source is not None else default_source
    sink = tuple(sink) if sink is not None else default_sink
    _check_terminals(rows, cols, source, sink)
    unit_ids = _grid_unit_ids(rows, cols)
    x, closed = _uniform(len(unit_ids), x0, p)
    return Lattice(rows, cols, p, unit_ids, x, closed, source, sink)


def build_chain(n_nodes: int, p: DeviceParams, x0: float) -> Lattice:
    """1 x n chain with the source at the first node and the sink at the last"""
    if n_nodes < 2:
        raise ValueError(f"chain needs at least 2 nodes, got {n_nodes}")
    unit_ids = _grid_unit_ids(1, n_nodes)
    x, closed = _uniform(len(unit_ids), x0, p)
    return Lattice(1, n_nodes, p, unit_ids, x, closed, (0, 0), (0, n_nodes - 1))


def check_incidence(l: Lattice) -> None:
    """Raise ValueError unless every unit joins two live, adjacent, in-grid nodes"""
    for name, node in (('source', l.source), ('sink', l.sink)):
        if node in l.removed_nodes:
            raise ValueError(f"{name} {node} has been removed")
    seen = set()
    for a, b in l.unit_ids:
        if a in l.removed_nodes or b in l.removed_nodes:
            raise ValueError(f"unit {a}-{b} references a removed node")
        if not (l.contains(a) and l.contains(b)):
            raise ValueError(f"unit {a}-{b} leaves the grid")
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            raise ValueError(f"unit {a}-{b} does not join nearest neighbours")
        key = frozenset((a, b))
        if key in seen:
            raise ValueError(f"duplicate unit between {a} and {b}")
        seen.add(key)


def _keep_units(l: Lattice, keep: np.ndarray, removed_nodes: frozenset[Node]) -> Lattice:
    unit_ids = tuple(uid for uid, k in zip(l.unit_ids, keep) if k)
    return l.replace(unit_ids=unit_ids, x=l.x[keep], closed=l.closed[keep], removed_nodes=removed_nodes)


def remove_nodes(l: Lattice, nodes: Iterable[Node]) -> Lattice:
    """Delete nodes and every unit touching them; terminals cannot be removed"""
    nodes = frozenset(tuple(n) for n in nodes)
    for node in nodes:
        if node in (l.source, l.sink):
            raise ValueError(f"cannot remove terminal node {node}")
        if not l.contains(node):
            raise ValueError(f"node {node} outside {l.rows}x{l.cols} grid")
    if not nodes:
        return l.replace()
    keep = np.array([a not in nodes and b not in nodes for a, b in l.unit_ids], dtype=bool)
    damaged = _keep_units(l, keep, l.removed_nodes | nodes)
    check_incidence(damaged)
    return damaged


def remove_units(l: Lattice, unit_ids: Iterable[UnitId]) -> Lattice:
    """Delete individual units; their endpoints stay in the lattice"""
    doomed = set(unit_ids)
    unknown = doomed - set(l.unit_index)
    if unknown:
        raise ValueError(f"unknown units: {sorted(unknown)}")
    keep = np.array([uid not in doomed for uid in l.unit_ids], dtype=bool)
    return _keep_units(l, keep, l.removed_nodes)


def initialize_network(l: Lattice, target: MemState | str) -> Lattice:
    """Write every device to r_off (OFF) or r_on (ON) through its access switch"""
    value = l.params.limit(MemState(target))
    return l.with_states(np.full_like(l.x, value))


def set_unit_states(l: Lattice, uid: UnitId, x_plus: float, x_minus: float) -> Lattice:
    """Write the two devices of one unit"""
    for value in (x_plus, x_minus):
        if not (l.params.r_on <= value <= l.params.r_off):
            raise ValueError(f"x={value} outside [{l.params.r_on}, {l.params.r_off}]")
    x = np.array(l.x, copy=True)
    x[l.unit_index[uid]] = (x_plus, x_minus)
    return l.with_states(x)


def set_switches(l: Lattice, uid: UnitId, plus_closed: bool, minus_closed: bool) -> Lattice:
    """Open or close the access switches of one unit"""
    closed = np.array(l.closed, copy=True)
    closed[l.unit_index[uid]] = (plus_closed, minus_closed)
    return l.replace(closed=closed)
