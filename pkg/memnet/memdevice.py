"""
Device-level model

A generic n-th order memory element (output y = g(x, u, t) * u, state rate
dx/dt = f(x, u, t)) and the concrete current-controlled bipolar memristive
device with threshold used by the lattice:

    V = x * I
    dx/dt = 0                                  for |I| <  I_t
    dx/dt = sgn(I) * gamma * (|I| - I_t)       for |I| >= I_t

with x hard-clamped to [r_on, r_off]. Positive own-frame current drives x
toward r_off (OFF); switching ON needs negative own-frame current.

Scalar helpers work on DeviceState values; the array helpers at the bottom
step a whole lattice at once and share the same rate function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np


class MemState(str, Enum):
    """Limiting state of a device or basic unit"""

    ON = 'ON'
    OFF = 'OFF'


@dataclass(frozen=True)
class DeviceParams:
    """Constants of the threshold memristive device (SI units)"""

    r_on: float = 10.0
    r_off: float = 200.0
    gamma: float = 1e6
    i_threshold: float = 0.01

    def __post_init__(self):
        if not (0 < self.r_on < self.r_off):
            raise ValueError(f"need 0 < r_on < r_off, got r_on={self.r_on}, r_off={self.r_off}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.i_threshold >= 0:
            raise ValueError(f"i_threshold must be non-negative, got {self.i_threshold}")

    @property
    def memory_content(self) -> float:
        """R_off / R_on of a single device"""
        return self.r_off / self.r_on

    @property
    def unit_on_resistance(self) -> float:
        """Parallel resistance of a unit with one device ON and one OFF"""
        return self.r_on * self.r_off / (self.r_on + self.r_off)

    @property
    def unit_off_resistance(self) -> float:
        """Parallel resistance of a unit with both devices OFF"""
        return self.r_off / 2

    def limit(self, target: MemState) -> float:
        return self.r_on if MemState(target) is MemState.ON else self.r_off


@dataclass(frozen=True)
class DeviceState:
    """Memristance x (ohm) and polarity of one device relative to its unit"""

    x: float
    orientation: int = 1

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {self.orientation}")

    def own_current(self, i: float) -> float:
        return self.orientation * i

    def check_bounds(self, p: DeviceParams) -> None:
        if not (p.r_on <= self.x <= p.r_off):
            raise ValueError(f"x={self.x} outside [{p.r_on}, {p.r_off}]")


def switching_rate(x, i_own, p: DeviceParams):
    """dx/dt of the threshold device; works on scalars and numpy arrays.

    The boundary |i_own| == I_t belongs to the active branch, where the rate
    is zero anyway.
    """
    i_own = np.asarray(i_own, dtype=float)
    magnitude = np.abs(i_own)
    active = magnitude >= p.i_threshold
    rate = np.where(active, np.sign(i_own) * p.gamma * (magnitude - p.i_threshold), 0.0)
    return rate + np.zeros_like(np.asarray(x, dtype=float))


def device_voltage(state: DeviceState, i: float) -> float:
    """V = x * i_own for a current i given in the unit's reference direction"""
    return state.x * state.own_current(i)


def device_step(state: DeviceState, i: float, dt: float, p: DeviceParams) -> DeviceState:
    """One explicit Euler step of a single device under unit-frame current i"""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    i_own = state.own_current(i)
    if abs(i_own) < p.i_threshold:
        return state
    x_next = state.x + float(switching_rate(state.x, i_own, p)) * dt
    x_next = min(max(x_next, p.r_on), p.r_off)
    return DeviceState(x=x_next, orientation=state.orientation)


# ----------------------------------------------------------------------------
# Generic memory element
# ----------------------------------------------------------------------------

Response = Callable[[np.ndarray, float, float], float]
Evolution = Callable[[np.ndarray, float, float], np.ndarray]


@dataclass(frozen=True)
class MemelementSpec:
    """n-th order u-controlled memory element: y = g(x,u,t) u, dx/dt = f(x,u,t)"""

    n: int
    response: Response
    evolution: Evolution
    name: str = field(default='memelement', compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"state dimension must be >= 1, got {self.n}")


def _frozen_copy(x: np.ndarray) -> np.ndarray:
    view = np.array(x, dtype=float, copy=True)
    view.setflags(write=False)
    return view


def memelement_eval(spec: MemelementSpec, x, u: float, t: float = 0.0) -> tuple[float, np.ndarray]:
    """
    Evaluate output and state derivative of a memory element.

    Args:
        spec: element description
        x: state vector of dimension spec.n
        u: input (current for a current-controlled element)
        t: time

    Returns:
        (y, dx): output and state derivative; x itself is never modified
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.n,):
        raise ValueError(f"{spec.name}: state has shape {x.shape}, expected ({spec.n},)")
    y = float(spec.response(_frozen_copy(x), u, t)) * u
    dx = np.atleast_1d(np.asarray(spec.evolution(_frozen_copy(x), u, t), dtype=float))
    if dx.shape != (spec.n,):
        raise ValueError(f"{spec.name}: evolution returned shape {dx.shape}, expected ({spec.n},)")
    return y, dx


def threshold_memristor(p: DeviceParams) -> MemelementSpec:
    """The threshold bipolar device as a first-order memelement (g = x)"""
    return MemelementSpec(
        n=1,
        response=lambda x, u, t: x[0],
        evolution=lambda x, u, t: np.array([float(switching_rate(x[0], u, p))]),
        name='threshold-memristor',
    )


def linear_resistor(resistance: float) -> MemelementSpec:
    """Memoryless limit: constant g, f identically zero"""
    return MemelementSpec(
        n=1,
        response=lambda x, u, t: resistance,
        evolution=lambda x, u, t: np.zeros(1),
        name='resistor',
    )


# ----------------------------------------------------------------------------
# Whole-lattice stepping
# ----------------------------------------------------------------------------

# Column 0 holds the device oriented a->b, column 1 the one oriented b->a.
ORIENTATIONS = np.array([1.0, -1.0])


def step_devices(x: np.ndarray, branch_currents: np.ndarray, dt: float, p: DeviceParams) -> np.ndarray:
    """
    Step every device of a lattice from one frozen set of branch currents.

    Args:
        x: (n_units, 2) memristances
        branch_currents: (n_units, 2) device currents in the unit's a->b direction
        dt: time step
        p: device constants

    Returns:
        New (n_units, 2) array; devices below threshold keep their exact value
    """
    i_own = branch_currents * ORIENTATIONS
    moved = np.clip(x + switching_rate(x, i_own, p) * dt, p.r_on, p.r_off)
    return np.where(np.abs(i_own) >= p.i_threshold, moved, x)
