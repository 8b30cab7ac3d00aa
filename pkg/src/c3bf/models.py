"""Acceleration-controlled reduced-order models and a fixed-step integrator.

Two surrogates stand in for the legged robot:

* ``UnicycleState`` / ``UnicycleInput``: motion in the ground (x-y) plane,
  used against vertical obstacles.
* ``PlanarState`` / ``PlanarInput``: a double integrator in the sagittal
  (x-z) plane with yaw assumed near zero, used against overhead obstacles.
"""

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import InvalidGeometryError

EULER = "euler"
RK4 = "rk4"
METHODS = (EULER, RK4)


def wrap_angle(theta):
    """Map an angle onto (-pi, pi]."""
    return theta - 2.0 * math.pi * math.ceil((theta - math.pi) / (2.0 * math.pi))


class _Vector:
    """Mixin for small float records that convert to and from numpy arrays."""

    def as_array(self):
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, arr):
        return cls(*(float(a) for a in arr))

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in fields(cls))

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not math.isfinite(val):
                raise ValueError(f"{type(self).__name__}.{f.name} must be finite, got {val}")


@dataclass(frozen=True)
class UnicycleState(_Vector):
    x_p: float
    y_p: float
    theta: float
    v: float
    omega: float

    def __post_init__(self):
        super().__post_init__()
        if not -math.pi < self.theta <= math.pi:
            object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class UnicycleInput(_Vector):
    accel: float
    alpha: float


@dataclass(frozen=True)
class PlanarState(_Vector):
    x_p: float
    z_p: float
    vx: float
    vz: float


@dataclass(frozen=True)
class PlanarInput(_Vector):
    accel_x: float
    accel_z: float


@dataclass(frozen=True)
class EgoParams:
    """Ego geometry: ``l`` is the body-center offset ahead of the
    differential-drive axis, ``width`` the body width."""

    l: float = 0.2
    width: float = 0.4

    def __post_init__(self):
        if not (self.l >= 0 and math.isfinite(self.l)):
            raise InvalidGeometryError(f"l must be >= 0, got {self.l}")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise InvalidGeometryError(f"width must be > 0, got {self.width}")


def _unicycle_rhs(x, u):
    _, _, theta, v, omega = x
    return np.array([v * math.cos(theta), v * math.sin(theta), omega, u[0], u[1]])


def _planar_rhs(x, u):
    return np.array([x[2], x[3], u[0], u[1]])


def unicycle_dynamics(state, inp):
    return _unicycle_rhs(state.as_array(), inp.as_array())


def planar_dynamics(state, inp):
    return _planar_rhs(state.as_array(), inp.as_array())


def _rhs_for(state):
    if isinstance(state, UnicycleState):
        return _unicycle_rhs
    if isinstance(state, PlanarState):
        return _planar_rhs
    raise TypeError(f"unsupported state type {type(state).__name__}")


def integrate(rhs, x, u, dt, method=RK4):
    """One fixed step on raw arrays. ``dt`` may be negative (backward flow)."""
    if method == EULER:
        return x + dt * rhs(x, u)
    if method == RK4:
        k1 = rhs(x, u)
        k2 = rhs(x + 0.5 * dt * k1, u)
        k3 = rhs(x + 0.5 * dt * k2, u)
        k4 = rhs(x + dt * k3, u)
        return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    raise ValueError(f"unknown integration method {method!r}; expected one of {METHODS}")


def step(state, inp, dt, method=RK4):
    """Advance ``state`` by ``dt`` with ``inp`` held constant over the step.

    The state type selects the model. Unicycle headings are re-wrapped
    after the step.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x_next = integrate(_rhs_for(state), state.as_array(), inp.as_array(), dt, method)
    return type(state).from_array(x_next)
