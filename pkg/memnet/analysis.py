"""
Observables and readout

Network entropy of the currents crossing a vertical cut, ON/OFF
classification of units, extraction of the ON-unit path between the
terminals, switching-rate time series along a watch list, and the
memory-content sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping

import networkx as nx
import numpy as np

from memnet.lattice import Lattice, Node, UnitId
from memnet.memdevice import DeviceParams, MemState

if TYPE_CHECKING:
    from memnet.engine import TraceRecord

# Relative slack when checking a unit resistance against its attainable range
RANGE_SLACK = 1e-9


def entropy(cut_currents: Iterable[float]) -> float:
    """-sum p ln p over magnitude-normalised currents; zero entries contribute 0"""
    magnitudes = np.abs(np.asarray(list(cut_currents), dtype=float))
    total = magnitudes.sum()
    if magnitudes.size == 0 or not total > 0:
        raise ValueError('entropy undefined: all cut currents are zero')
    p = magnitudes[magnitudes > 0] / total
    return float(-(p * np.log(p)).sum())


def on_off_boundary(p: DeviceParams) -> float:
    """Geometric mean of the attainable unit resistances"""
    return math.sqrt(p.unit_on_resistance * p.unit_off_resistance)


def classify_unit(r_unit: float, p: DeviceParams) -> MemState:
    lo, hi = p.unit_on_resistance, p.unit_off_resistance
    if not (lo * (1 - RANGE_SLACK) <= r_unit <= hi * (1 + RANGE_SLACK)):
        raise ValueError(f"unit resistance {r_unit} outside attainable range [{lo:.6g}, {hi:.6g}]")
    return MemState.ON if r_unit < on_off_boundary(p) else MemState.OFF


@dataclass(frozen=True)
class PathReport:
    """ON units and the shortest ON-unit path between the terminals"""

    on_units: frozenset[UnitId]
    path: tuple[Node, ...] | None
    path_length: int
    extra_on_count: int

    @property
    def found(self) -> bool:
        return self.path is not None

    @property
    def path_units(self) -> frozenset[UnitId]:
        if self.path is None:
            return frozenset()
        return frozenset(_unit_key(a, b) for a, b in zip(self.path, self.path[1:]))


def _unit_key(a: Node, b: Node) -> UnitId:
    return (a, b) if a < b else (b, a)


def extract_path(l: Lattice, classes: Mapping[UnitId, MemState]) -> PathReport:
    """Breadth-first shortest path from source to sink over ON units"""
    on_units = frozenset(uid for uid in l.unit_ids if MemState(classes[uid]) is MemState.ON)
    graph = nx.Graph()
    graph.add_edges_from(on_units)
    path = None
    if l.source in graph and l.sink in graph:
        try:
            path = tuple(nx.shortest_path(graph, l.source, l.sink))
        except nx.NetworkXNoPath:
            path = None
    length = len(path) - 1 if path else 0
    return PathReport(on_units=on_units, path=path, path_length=length, extra_on_count=len(on_units) - length)


def validate_path(l: Lattice, report: PathReport) -> None:
    """Raise ValueError unless the reported path is simple, ON-connected and ends at the terminals"""
    if report.path is None:
        return
    path = report.path
    if path[0] != l.source or path[-1] != l.sink:
        raise ValueError(f"path runs {path[0]} -> {path[-1]}, expected {l.source} -> {l.sink}")
    if len(set(path)) != len(path):
        raise ValueError('path revisits a node')
    for a, b in zip(path, path[1:]):
        uid = _unit_key(a, b)
        if uid not in l.unit_index:
            raise ValueError(f"no unit between {a} and {b}")
        if uid not in report.on_units:
            raise ValueError(f"unit {a}-{b} on the path is not ON")
    if report.path_length != len(path) - 1:
        raise ValueError('path_length does not match the path')


# ----------------------------------------------------------------------------
# Time series
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchingSeries:
    """|dR/dt| of watched units over the sampled intervals of a trace"""

    times: np.ndarray
    units: tuple[UnitId, ...]
    rates: np.ndarray  # (len(times), len(units))

    def of(self, uid: UnitId) -> np.ndarray:
        return self.rates[:, self.units.index(uid)]


def switching_rate_series(trace: list[TraceRecord], units: Iterable[UnitId], l: Lattice) -> SwitchingSeries:
    """Finite-difference |dR_unit/dt| between consecutive resistance snapshots"""
    units = tuple(units)
    samples = [rec for rec in trace if rec.unit_resistances is not None]
    if len(samples) < 2:
        raise ValueError(f"need at least 2 trace samples with snapshots, got {len(samples)}")
    index = np.array([l.unit_index[uid] for uid in units], dtype=int)
    t = np.array([rec.t for rec in samples])
    r = np.array([rec.unit_resistances[index] for rec in samples]).reshape(len(samples), len(units))
    rates = np.abs(np.diff(r, axis=0)) / np.diff(t)[:, None]
    return SwitchingSeries(times=t[1:], units=units, rates=rates)


def peak_switching_times(series: SwitchingSeries) -> dict[UnitId, float | None]:
    """Time of the largest |dR/dt| per unit (None for a unit that never moved)"""
    out = {}
    for j, uid in enumerate(series.units):
        column = series.rates[:, j]
        out[uid] = float(series.times[int(np.argmax(column))]) if column.max() > 0 else None
    return out


def terminal_distance(l: Lattice, uid: UnitId) -> int:
    """Unit steps from the nearer terminal along the source row"""
    (_, c0), (_, c1) = uid
    first, last = sorted((l.source[1], l.sink[1]))
    return min(min(c0, c1) - first, last - max(c0, c1))


def emerges_from_both_ends(series: SwitchingSeries, l: Lattice) -> bool:
    """Units nearer a terminal reach peak switching no later than units farther in"""
    peaks = peak_switching_times(series)
    if any(t is None for t in peaks.values()):
        return False
    by_distance: dict[int, list[float]] = {}
    for uid, t in peaks.items():
        by_distance.setdefault(terminal_distance(l, uid), []).append(t)
    ordered = [by_distance[d] for d in sorted(by_distance)]
    return all(max(inner) <= min(outer) for inner, outer in zip(ordered, ordered[1:]))


@dataclass(frozen=True)
class EntropySeries:
    """Entropy samples of one memory-content run"""

    ratio: float
    amplitude: float
    cut: int
    samples: tuple[tuple[float, float], ...] = ()
    steady: bool = False
    error: str | None = None

    @property
    def initial(self) -> float:
        return self.samples[0][1]

    @property
    def final(self) -> float:
        return self.samples[-1][1]

    @property
    def undefined_samples(self) -> int:
        return sum(1 for _, s in self.samples if not math.isfinite(s))

    def increases(self, tolerance: float = 1e-6) -> int:
        """Number of sample-to-sample rises larger than tolerance"""
        values = [s for _, s in self.samples]
        return sum(1 for a, b in zip(values, values[1:]) if b > a + tolerance)

    def rising_episodes(self, tolerance: float = 1e-6) -> int:
        """Number of separate stretches of consecutive rises larger than tolerance"""
        if len(self.samples) < 2:
            return 0
        rises = np.diff([s for _, s in self.samples]) > tolerance
        starts = rises & ~np.concatenate([[False], rises[:-1]])
        return int(np.count_nonzero(starts))


@dataclass(frozen=True)
class SweepPoint:
    r_on: float
    amplitude: float


@dataclass(frozen=True)
class SweepResult:
    series: tuple[EntropySeries, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.series)

    def __len__(self):
        return len(self.series)


def sweep_memory_content(base, points: Iterable[SweepPoint | tuple[float, float]]) -> SweepResult:
    """
    One fresh run per (r_on, amplitude) pair, entropy sampled along each.

    Args:
        base: ExperimentConfig supplying grid, terminals and pulse settings
        points: (r_on, amplitude) pairs

    Returns:
        SweepResult with one EntropySeries per pair; a failed run is kept as
        an entry carrying its error instead of aborting the sweep
    """
    # imported here: engine depends on this module
    from memnet.engine import run_pulse
    from memnet.errors import MemnetError
    from memnet.experiments import prepare_lattice

    out = []
    for point in points:
        r_on, amplitude = (point.r_on, point.amplitude) if isinstance(point, SweepPoint) else point
        ratio = base.device.r_off / r_on
        try:
            config = base.with_overrides({'device.r_on': r_on, 'pulse.amplitude': amplitude})
            lattice = prepare_lattice(config)
            run = run_pulse(lattice, config.pulse_spec(), cut=config.entropy_cut, snapshots=False)
            samples = tuple((rec.t, rec.entropy) for rec in run.trace)
            out.append(EntropySeries(ratio, amplitude, run.cut, samples, run.steady))
        except (MemnetError, ValueError) as e:
            out.append(EntropySeries(ratio, amplitude, base.entropy_cut or -1, error=str(e)))
    return SweepResult(tuple(out))
