"""Threshold device model: voltage, Euler step, memelement interface."""

import numpy as np
import pytest

from memnet.memdevice import (
    DeviceParams,
    DeviceState,
    MemState,
    device_step,
    device_voltage,
    linear_resistor,
    memelement_eval,
    step_devices,
    switching_rate,
    threshold_memristor,
)

DT = 1e-6


# ============================================================================
# DeviceParams
# ============================================================================

class TestDeviceParams:
    def test_defaults(self, params):
        assert (params.r_on, params.r_off, params.gamma, params.i_threshold) == (10.0, 200.0, 1e6, 0.01)
        assert params.memory_content == 20.0

    def test_unit_limits(self, params):
        assert params.unit_off_resistance == 100.0
        assert params.unit_on_resistance == pytest.approx(2000.0 / 210.0)

    @pytest.mark.parametrize('kwargs', [
        {'r_on': 300.0},
        {'r_on': 0.0},
        {'gamma': 0.0},
        {'i_threshold': -1e-3},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            DeviceParams(**kwargs)

    def test_limit(self, params):
        assert params.limit(MemState.ON) == 10.0
        assert params.limit('OFF') == 200.0


# ============================================================================
# device_voltage
# ============================================================================

class TestDeviceVoltage:
    def test_zero_current(self):
        assert device_voltage(DeviceState(200.0), 0.0) == 0.0

    def test_off_device(self):
        assert device_voltage(DeviceState(200.0), 0.03) == pytest.approx(6.0)

    def test_on_device(self):
        assert device_voltage(DeviceState(10.0), 0.6) == pytest.approx(6.0)

    def test_orientation_flips_sign(self):
        assert device_voltage(DeviceState(200.0, -1), 0.03) == pytest.approx(-6.0)


# ============================================================================
# device_step
# ============================================================================

class TestDeviceStep:
    def test_deadzone_is_identity(self, params):
        state = DeviceState(150.0)
        assert device_step(state, 0.005, DT, params) == state

    @pytest.mark.parametrize('i', [0.0, 0.0099, -0.0099])
    @pytest.mark.parametrize('dt', [1e-9, 1e-6, 1.0])
    def test_deadzone_any_dt(self, params, i, dt):
        assert device_step(DeviceState(123.4), i, dt, params).x == 123.4

    def test_negative_current_moves_toward_on(self, params):
        nxt = device_step(DeviceState(200.0), -0.03, DT, params)
        assert nxt.x == pytest.approx(199.98, abs=1e-12)

    def test_clamp_at_r_off(self, params):
        assert device_step(DeviceState(200.0), 0.03, DT, params).x == 200.0

    def test_clamp_at_r_on(self, params):
        assert device_step(DeviceState(10.0001), -1.0, 1e-3, params).x == 10.0

    def test_orientation_antisymmetry(self, params):
        a = device_step(DeviceState(100.0, 1), -0.03, DT, params)
        b = device_step(DeviceState(100.0, -1), 0.03, DT, params)
        assert a.x == b.x
        assert b.orientation == -1

    def test_rejects_non_positive_dt(self, params):
        with pytest.raises(ValueError):
            device_step(DeviceState(100.0), 0.03, 0.0, params)

    def test_clamp_safety_random_currents(self, params):
        rng = np.random.default_rng(7)
        state = DeviceState(105.0)
        for i in rng.normal(0.0, 0.2, size=2000):
            state = device_step(state, float(i), 1e-4, params)
            assert params.r_on <= state.x <= params.r_off

    @pytest.mark.parametrize('i, direction', [(0.02, 1), (-0.02, -1)])
    def test_monotone_drive(self, params, i, direction):
        state = DeviceState(105.0)
        previous = state.x
        for _ in range(50):
            state = device_step(state, i, 1e-5, params)
            assert direction * (state.x - previous) >= 0
            previous = state.x

    def test_euler_consistency_between_clamps(self, params):
        coarse = DeviceState(100.0)
        for _ in range(1000):
            coarse = device_step(coarse, 0.02, 1e-6, params)
        fine = DeviceState(100.0)
        for _ in range(2000):
            fine = device_step(fine, 0.02, 5e-7, params)
        assert coarse.x == pytest.approx(110.0, abs=1e-9)
        assert fine.x == pytest.approx(coarse.x, abs=1e-9)

    def test_boundary_current_is_active_with_zero_rate(self, params):
        assert float(switching_rate(100.0, params.i_threshold, params)) == 0.0


# ============================================================================
# memelement interface
# ============================================================================

class TestMemelement:
    def test_zero_input_zero_output(self, params):
        y, _ = memelement_eval(threshold_memristor(params), [150.0], 0.0)
        assert y == 0.0

    def test_threshold_instance_matches_device(self, params):
        y, dx = memelement_eval(threshold_memristor(params), [200.0], 0.03)
        assert y == pytest.approx(device_voltage(DeviceState(200.0), 0.03))
        assert dx[0] == pytest.approx(params.gamma * 0.02)

    def test_resistor_has_no_memory(self):
        spec = linear_resistor(50.0)
        for u in (-1.0, 0.0, 0.5):
            y, dx = memelement_eval(spec, [1.0], u)
            assert y == pytest.approx(50.0 * u)
            assert np.all(dx == 0)

    def test_dimension_mismatch(self, params):
        with pytest.raises(ValueError):
            memelement_eval(threshold_memristor(params), [1.0, 2.0], 0.01)

    def test_state_untouched(self, params):
        x = np.array([150.0])
        memelement_eval(threshold_memristor(params), x, 0.5)
        assert x[0] == 150.0


# ============================================================================
# step_devices
# ============================================================================

class TestStepDevices:
    def test_antiparallel_pair(self, params):
        x = np.full((1, 2), 200.0)
        currents = np.full((1, 2), 0.03)
        nxt = step_devices(x, currents, DT, params)
        # slot 0 sees +0.03 in its own frame (toward OFF), slot 1 sees -0.03
        assert nxt[0, 0] == 200.0
        assert nxt[0, 1] == pytest.approx(199.98, abs=1e-12)

    def test_matches_scalar_step(self, params):
        rng = np.random.default_rng(3)
        x = rng.uniform(10, 200, size=(20, 2))
        currents = rng.normal(0, 0.05, size=(20, 2))
        nxt = step_devices(x, currents, 1e-5, params)
        for k in range(20):
            for slot, orientation in ((0, 1), (1, -1)):
                expected = device_step(DeviceState(x[k, slot], orientation), currents[k, slot], 1e-5, params).x
                assert nxt[k, slot] == pytest.approx(expected, abs=1e-12)

    def test_below_threshold_exact(self, params):
        x = np.array([[123.456789, 98.7654321]])
        assert np.array_equal(step_devices(x, np.full((1, 2), 0.001), DT, params), x)
