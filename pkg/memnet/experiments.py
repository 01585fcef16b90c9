"""
Figure-reproduction runs

Each run follows the three stages of the algorithm: initialize every device
OFF, apply one pulse until the network stops changing, read the unit states
and extract the source->sink path.

    fig2   shortest path on the intact grid
    fig3a  fig2 plus switching-rate series and the emergence-order check
    fig3b  entropy decay for a sweep of memory contents
    fig4   fig2 pipeline at low memory content
    fig5   fig2 run, node damage on the solution, second pulse to heal
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

from memnet.analysis import (
    PathReport,
    SweepResult,
    SwitchingSeries,
    emerges_from_both_ends,
    extract_path,
    sweep_memory_content,
    switching_rate_series,
    validate_path,
)
from memnet.config import DEFAULT_SWEEP, ExperimentConfig
from memnet.engine import TraceRecord, UnitReading, read_state, run_pulse
from memnet.kirchhoff import KirchhoffSolver, SolveResult
from memnet.lattice import Lattice, UnitId, build_grid, initialize_network, remove_nodes
from memnet.memdevice import MemState


@dataclass(frozen=True)
class RunArtifacts:
    """Everything one pulse run produces, ready for emit_outputs"""

    name: str
    config: ExperimentConfig
    initial: Lattice
    final: Lattice
    initial_solve: SolveResult
    final_solve: SolveResult
    trace: tuple[TraceRecord, ...]
    switching: SwitchingSeries | None
    readout: dict[UnitId, UnitReading]
    path: PathReport
    steady: bool
    steps: int
    cut: int
    wall_time: float
    emergence: bool | None = None

    @property
    def max_time(self) -> float:
        return self.config.pulse.max_time

    @property
    def undefined_entropy(self) -> int:
        """Trace samples whose cut carried no current (entropy written as nan)"""
        return sum(1 for rec in self.trace if not math.isfinite(rec.entropy))


@dataclass(frozen=True)
class SweepArtifacts:
    name: str
    config: ExperimentConfig
    result: SweepResult
    wall_time: float


def prepare_lattice(config: ExperimentConfig) -> Lattice:
    """Grid from the config with every device written OFF; fig5 damage waits for phase 2"""
    l = build_grid(config.rows, config.cols, config.device, config.device.r_off, config.source, config.sink)
    if config.damage and config.experiment != 'fig5':
        l = remove_nodes(l, config.damage)
    return initialize_network(l, MemState.OFF)


def _classes(readout: dict[UnitId, UnitReading]) -> dict[UnitId, MemState]:
    return {uid: reading.state for uid, reading in readout.items()}


def _pulse_and_read(name: str, config: ExperimentConfig, l: Lattice) -> RunArtifacts:
    started = time.perf_counter()
    run = run_pulse(l, config.pulse_spec(), watch=config.watch, cut=config.entropy_cut)
    readout = read_state(run.lattice)
    report = extract_path(run.lattice, _classes(readout))
    validate_path(run.lattice, report)
    switching = None
    if run.watch and sum(rec.unit_resistances is not None for rec in run.trace) >= 2:
        switching = switching_rate_series(run.trace, run.watch, l)
    return RunArtifacts(
        name=name,
        config=config,
        initial=l,
        final=run.lattice,
        initial_solve=run.first_solve,
        final_solve=run.last_solve,
        trace=tuple(run.trace),
        switching=switching,
        readout=readout,
        path=report,
        steady=run.steady,
        steps=run.steps,
        cut=run.cut,
        wall_time=time.perf_counter() - started,
    )


def run_fig2(config: ExperimentConfig) -> RunArtifacts:
    """Shortest path between the configured terminals"""
    return _pulse_and_read('fig2', config, prepare_lattice(config))


def run_fig3a(config: ExperimentConfig) -> RunArtifacts:
    """fig2 run with the check that switching starts at both terminals and moves inward"""
    artifacts = _pulse_and_read('fig3a', config, prepare_lattice(config))
    emergence = None
    if artifacts.switching is not None:
        emergence = emerges_from_both_ends(artifacts.switching, artifacts.initial)
    return replace(artifacts, emergence=emergence)


def run_fig3b(config: ExperimentConfig) -> SweepArtifacts:
    """Entropy series for each (r_on, amplitude) pair, the four reference pairs when none are configured"""
    started = time.perf_counter()
    result = sweep_memory_content(config, config.sweep or DEFAULT_SWEEP)
    return SweepArtifacts('fig3b', config, result, time.perf_counter() - started)


def run_fig4(config: ExperimentConfig) -> RunArtifacts:
    return _pulse_and_read('fig4', config, prepare_lattice(config))


def run_fig5(config: ExperimentConfig) -> tuple[RunArtifacts, RunArtifacts]:
    """
    Damage the fig2 solution and heal it with a second pulse.

    Phase 1 solves the intact grid. The damage nodes are then removed from
    the final lattice (surviving devices keep their states) and the same
    pulse is applied again.

    Returns:
        (damaged, healed); damaged holds the phase-1 run read out after the
        removal, healed the second pulse

    Raises:
        NoCircuitError: the damage separates source from sink
    """
    solved = _pulse_and_read('fig5', config, prepare_lattice(config))
    damaged_lattice = remove_nodes(solved.final, config.damage)
    healed = _pulse_and_read('healed', config, damaged_lattice)

    v_applied, v_sink = config.pulse_spec().terminal_potentials
    readout = read_state(damaged_lattice)
    damaged = replace(
        solved,
        name='damaged',
        final=damaged_lattice,
        final_solve=KirchhoffSolver(damaged_lattice).solve(damaged_lattice.x, v_applied, v_sink),
        readout=readout,
        path=extract_path(damaged_lattice, _classes(readout)),
    )
    return damaged, healed


RUNNERS = {
    'fig2': run_fig2,
    'fig3a': run_fig3a,
    'fig3b': run_fig3b,
    'fig4': run_fig4,
    'fig5': run_fig5,
}


def run_experiment(config: ExperimentConfig):
    """Dispatch on config.experiment"""
    return RUNNERS[config.experiment](config)
