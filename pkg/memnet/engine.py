"""
Time evolution of a lattice under a constant voltage pulse

Synchronous solve-then-step loop: one Kirchhoff solve per step, then every
device steps from that frozen set of currents. The run stops at the first
step where no device state changes (steady state) or at max_time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from memnet.analysis import classify_unit, entropy
from memnet.errors import SolverError
from memnet.kirchhoff import KirchhoffSolver, SolveResult, cross_section_currents
from memnet.lattice import Lattice, UnitId, parallel_resistances
from memnet.memdevice import MemState, step_devices


class Drive(str, Enum):
    """How the pulse amplitude is put on the terminals"""

    SINGLE = 'single'              # source at +V, sink at 0
    DIFFERENTIAL = 'differential'  # source at +V, sink at -V


@dataclass(frozen=True)
class PulseSpec:
    """Constant-amplitude pulse and its integration settings"""

    amplitude: float
    dt: float = 1e-6
    max_time: float = 1.0
    record_every: int = 1
    drive: Drive = Drive.SINGLE

    def __post_init__(self):
        if self.amplitude == 0 or not math.isfinite(self.amplitude):
            raise ValueError(f"amplitude must be finite and non-zero, got {self.amplitude}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.max_time >= self.dt:
            raise ValueError(f"max_time ({self.max_time}) must be >= dt ({self.dt})")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        object.__setattr__(self, 'drive', Drive(self.drive))

    @property
    def terminal_potentials(self) -> tuple[float, float]:
        """(v_applied, v_sink) handed to the Kirchhoff solve"""
        if self.drive is Drive.DIFFERENTIAL:
            return 2 * self.amplitude, -self.amplitude
        return self.amplitude, 0.0

    @property
    def max_steps(self) -> int:
        return max(1, int(round(self.max_time / self.dt)))


@dataclass(frozen=True)
class TraceRecord:
    """Observables sampled at one step"""

    step: int
    t: float
    entropy: float
    total_current: float
    unit_resistances: np.ndarray | None = None
    watch_rates: np.ndarray = field(default_factory=lambda: np.zeros(0))


class PulseRun(NamedTuple):
    lattice: Lattice
    trace: list[TraceRecord]
    steady: bool
    steps: int
    first_solve: SolveResult
    last_solve: SolveResult
    watch: tuple[UnitId, ...]
    cut: int


class UnitReading(NamedTuple):
    resistance: float
    state: MemState


def default_watch(l: Lattice) -> tuple[UnitId, ...]:
    """Horizontal units of the source row between the source and sink columns"""
    row = l.source[0]
    lo, hi = sorted((l.source[1], l.sink[1]))
    return tuple(uid for uid in (l.horizontal_unit(row, c) for c in range(lo, hi)) if uid in l.unit_index)


def default_cut(l: Lattice) -> int:
    return (l.cols - 1) // 2


def _cut_entropy(sr: SolveResult, l: Lattice, cut: int) -> float:
    """nan when no current crosses the cut; emit_outputs counts these as entropy_undefined"""
    try:
        return entropy(cross_section_currents(sr, l, cut))
    except ValueError:
        return math.nan


def run_pulse(l: Lattice, pulse: PulseSpec, watch: tuple[UnitId, ...] | None = None,
              cut: int | None = None, snapshots: bool = True) -> PulseRun:
    """
    Apply a pulse to the lattice terminals until steady state or max_time.

    Args:
        l: initial lattice (not modified)
        pulse: amplitude, time step and stop settings
        watch: units whose |dR/dt| is recorded (default: the source row)
        cut: column boundary for the entropy cut (default: central)
        snapshots: keep a unit-resistance snapshot in every trace record

    Returns:
        PulseRun with the final lattice, sampled trace and steady flag
    """
    watch = default_watch(l) if watch is None else tuple(watch)
    cut = default_cut(l) if cut is None else cut
    watch_index = np.array([l.unit_index[uid] for uid in watch], dtype=int)
    solver = KirchhoffSolver(l)
    v_applied, v_sink = pulse.terminal_potentials
    p = l.params

    def record(step: int, x: np.ndarray, sr: SolveResult, rates: np.ndarray) -> TraceRecord:
        return TraceRecord(
            step=step,
            t=step * pulse.dt,
            entropy=_cut_entropy(sr, l, cut),
            total_current=sr.total_current,
            unit_resistances=parallel_resistances(x, l.closed) if snapshots else None,
            watch_rates=rates,
        )

    x = np.array(l.x, copy=True)
    trace: list[TraceRecord] = []
    rates = np.zeros(len(watch_index))
    steady = False
    step = 0
    sr = first = solver.solve(x, v_applied, v_sink)
    while True:
        if not np.all(np.isfinite(sr.branch_currents)):
            raise SolverError('non-finite branch currents', {'step': step})
        if step % pulse.record_every == 0:
            trace.append(record(step, x, sr, rates))
        x_next = step_devices(x, sr.branch_currents, pulse.dt, p)
        changed = not np.array_equal(x_next, x)
        r_now = parallel_resistances(x[watch_index], l.closed[watch_index])
        r_next = parallel_resistances(x_next[watch_index], l.closed[watch_index])
        rates = np.abs(r_next - r_now) / pulse.dt
        x = x_next
        step += 1
        if not changed:
            steady = True
            break
        if step >= pulse.max_steps:
            break
        sr = solver.solve(x, v_applied, v_sink)

    last = solver.solve(x, v_applied, v_sink)
    if not trace or trace[-1].step != step:
        trace.append(record(step, x, last, rates))
    return PulseRun(l.with_states(x), trace, steady, step, first, last, watch, cut)


def steady_state(l_prev: Lattice, l_next: Lattice) -> bool:
    """True iff no device memristance differs between two snapshots of one topology"""
    if not l_prev.same_topology(l_next):
        raise ValueError('lattices have different topologies')
    return bool(np.array_equal(l_prev.x, l_next.x))


def read_state(l: Lattice) -> dict[UnitId, UnitReading]:
    """Per-unit parallel resistance and ON/OFF class; never touches device states"""
    p = l.params
    out = {}
    for uid, resistance, closed in zip(l.unit_ids, l.unit_resistances(), l.closed):
        if closed.all():
            # both devices ON (r_on / 2) reads as ON
            clamped = min(max(float(resistance), p.unit_on_resistance), p.unit_off_resistance)
            state = classify_unit(clamped, p)
        elif closed.any():
            # a single device behind its switch: compare against the device limits
            state = MemState.ON if resistance < math.sqrt(p.r_on * p.r_off) else MemState.OFF
        else:
            state = MemState.OFF
        out[uid] = UnitReading(float(resistance), state)
    return out


def probe_read(l: Lattice, v_probe: float) -> tuple[dict[UnitId, UnitReading], SolveResult]:
    """
    Electrical readout under a sub-threshold probe voltage.

    Raises ValueError if any device current would reach the threshold, since
    such a probe would rewrite the result it is reading.
    """
    sr = KirchhoffSolver(l).solve(l.x, v_probe)
    peak = float(np.max(np.abs(sr.branch_currents))) if l.n_units else 0.0
    if peak >= l.params.i_threshold:
        raise ValueError(
            f"probe of {v_probe} V drives {peak:.4g} A through a device (threshold {l.params.i_threshold} A)")
    return read_state(l), sr
