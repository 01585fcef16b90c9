"""Pulse loop, steady state and readout."""

import math

import numpy as np
import pytest

from memnet.engine import (
    Drive,
    PulseSpec,
    default_cut,
    default_watch,
    probe_read,
    read_state,
    run_pulse,
    steady_state,
)
from memnet.lattice import build_chain, build_grid, remove_nodes, set_switches, set_unit_states
from memnet.memdevice import MemState


class TestPulseSpec:
    def test_defaults(self):
        pulse = PulseSpec(6.0)
        assert (pulse.dt, pulse.max_time, pulse.record_every, pulse.drive) == (1e-6, 1.0, 1, Drive.SINGLE)
        assert pulse.max_steps == 1_000_000

    def test_terminal_potentials(self):
        assert PulseSpec(6.0).terminal_potentials == (6.0, 0.0)
        assert PulseSpec(6.0, drive='differential').terminal_potentials == (12.0, -6.0)

    @pytest.mark.parametrize('kwargs', [
        {'amplitude': 0.0},
        {'amplitude': math.inf},
        {'amplitude': 6.0, 'dt': 0.0},
        {'amplitude': 6.0, 'dt': 1e-3, 'max_time': 1e-4},
        {'amplitude': 6.0, 'record_every': 0},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PulseSpec(**kwargs)

    def test_rejects_unknown_drive(self):
        with pytest.raises(ValueError):
            PulseSpec(6.0, drive='bipolar')


class TestDefaults:
    def test_watch_is_source_row(self, grid11):
        watch = default_watch(grid11)
        assert len(watch) == 10
        assert watch[0] == ((5, 0), (5, 1))
        assert watch[-1] == ((5, 9), (5, 10))

    def test_watch_skips_removed_units(self, grid11):
        assert len(default_watch(remove_nodes(grid11, [(5, 5)]))) == 8

    def test_central_cut(self, grid11):
        assert default_cut(grid11) == 5


# ============================================================================
# run_pulse
# ============================================================================

class TestRunPulse:
    def test_sub_threshold_is_immediately_steady(self, grid11):
        run = run_pulse(grid11, PulseSpec(0.5, dt=1e-5, drive=Drive.DIFFERENTIAL))
        assert run.steady
        assert run.steps == 1
        assert np.array_equal(run.lattice.x, grid11.x)

    def test_single_drive_6v_does_not_switch(self, grid11):
        run = run_pulse(grid11, PulseSpec(6.0, dt=1e-5))
        assert run.steady
        assert np.max(np.abs(run.first_solve.branch_currents)) < grid11.params.i_threshold

    def test_input_lattice_untouched(self, params):
        l = build_grid(3, 3, params, 200.0)
        before = np.array(l.x, copy=True)
        run = run_pulse(l, PulseSpec(6.0, dt=1e-5, max_time=1e-3))
        assert np.array_equal(l.x, before)
        assert not np.array_equal(run.lattice.x, before)

    def test_stops_at_max_time(self, params):
        run = run_pulse(build_grid(3, 3, params, 200.0), PulseSpec(6.0, dt=1e-5, max_time=2e-4))
        assert not run.steady
        assert run.steps == 20

    def test_trace_sampling(self, params):
        run = run_pulse(build_grid(3, 3, params, 200.0), PulseSpec(6.0, dt=1e-5, max_time=2.5e-4, record_every=10))
        steps = [rec.step for rec in run.trace]
        assert steps == [0, 10, 20, 25]
        assert run.trace[1].t == pytest.approx(1e-4)

    def test_first_record_entropy(self, grid11):
        run = run_pulse(grid11, PulseSpec(0.5, dt=1e-5, drive=Drive.DIFFERENTIAL))
        assert run.trace[0].entropy == pytest.approx(2.3884, abs=1e-3)
        assert run.trace[0].total_current == pytest.approx(run.first_solve.total_current)

    def test_snapshots_optional(self, params):
        run = run_pulse(build_grid(3, 3, params, 200.0), PulseSpec(6.0, dt=1e-5, max_time=1e-4), snapshots=False)
        assert all(rec.unit_resistances is None for rec in run.trace)

    def test_devices_stay_in_bounds(self, params):
        run = run_pulse(build_grid(3, 3, params, 200.0), PulseSpec(20.0, dt=1e-5, max_time=5e-3))
        assert np.all(run.lattice.x >= params.r_on)
        assert np.all(run.lattice.x <= params.r_off)

    def test_single_unit_switches_on(self, params):
        run = run_pulse(build_chain(2, params, 200.0), PulseSpec(6.0, dt=1e-5))
        assert run.steady
        x_plus, x_minus = run.lattice.x[0]
        # source above sink: the b->a device sees negative own-frame current
        assert x_plus == 200.0
        assert x_minus == 10.0


class TestSteadyState:
    def test_identical(self, grid11):
        assert steady_state(grid11, grid11.replace())

    def test_changed(self, grid11):
        assert not steady_state(grid11, set_unit_states(grid11, ((0, 0), (0, 1)), 199.0, 200.0))

    def test_topology_mismatch(self, grid11):
        with pytest.raises(ValueError):
            steady_state(grid11, remove_nodes(grid11, [(1, 1)]))


# ============================================================================
# Readout
# ============================================================================

class TestReadState:
    def test_fresh_lattice_reads_off(self, grid11):
        readout = read_state(grid11)
        assert len(readout) == grid11.n_units
        assert all(r.state is MemState.OFF for r in readout.values())
        assert all(r.resistance == pytest.approx(100.0) for r in readout.values())

    def test_one_device_on(self, grid11):
        uid = ((5, 0), (5, 1))
        readout = read_state(set_unit_states(grid11, uid, 200.0, 10.0))
        assert readout[uid].state is MemState.ON
        assert readout[uid].resistance == pytest.approx(9.5238095238, abs=1e-9)

    def test_both_devices_on(self, grid11):
        uid = ((5, 0), (5, 1))
        readout = read_state(set_unit_states(grid11, uid, 10.0, 10.0))
        assert readout[uid].state is MemState.ON
        assert readout[uid].resistance == pytest.approx(5.0)

    def test_single_closed_switch(self, grid11):
        uid = ((5, 0), (5, 1))
        l = set_switches(set_unit_states(grid11, uid, 10.0, 200.0), uid, True, False)
        assert read_state(l)[uid].state is MemState.ON
        l = set_switches(l, uid, False, True)
        assert read_state(l)[uid].state is MemState.OFF

    def test_open_unit(self, grid11):
        uid = ((5, 0), (5, 1))
        reading = read_state(set_switches(grid11, uid, False, False))[uid]
        assert reading.state is MemState.OFF
        assert reading.resistance == math.inf

    def test_does_not_change_states(self, grid11):
        before = np.array(grid11.x, copy=True)
        read_state(grid11)
        assert np.array_equal(grid11.x, before)


class TestProbeRead:
    def test_sub_threshold_probe(self, grid11):
        readout, sr = probe_read(grid11, 0.1)
        assert all(r.state is MemState.OFF for r in readout.values())
        assert sr.total_current > 0

    def test_rejects_switching_probe(self, grid11):
        with pytest.raises(ValueError, match='threshold'):
            probe_read(grid11, 20.0)
