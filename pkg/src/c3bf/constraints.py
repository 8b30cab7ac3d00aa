"""Assembly of collision cone barrier constraints for both reduced models.

For either model the barrier derivative splits as

    hdot = L_f h + L_g h . u

and the filter works with ``psi = L_f h + L_g h . u_ref + gamma * h``.
Obstacles move with constant velocity, so the relative acceleration is
driven by the ego input alone.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateVelocityError, InvalidGeometryError
from .geometry import _tangent_length, as_vec2, effective_radius

# below this relative speed the cone direction is undefined
SPEED_EPS = 1e-8


@dataclass(frozen=True)
class ObstacleState:
    center: np.ndarray
    velocity: np.ndarray
    r: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec2(self.center))
        object.__setattr__(self, "velocity", as_vec2(self.velocity))
        if not (self.r > 0 and math.isfinite(self.r)):
            raise InvalidGeometryError(f"obstacle radius must be positive, got {self.r}")

    @classmethod
    def from_ellipse(cls, center, velocity, semi_axes, ego_width=0.0):
        return cls(center, velocity, effective_radius(semi_axes[0], semi_axes[1], ego_width))

    def at(self, t):
        """The obstacle after ``t`` seconds of constant-velocity motion."""
        return replace(self, center=self.center + t * self.velocity)


@dataclass(frozen=True)
class ClassK:
    """Linear extended class-K function kappa(h) = gamma * h."""

    gamma: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def __call__(self, h):
        return self.gamma * h


@dataclass(frozen=True)
class ConstraintEval:
    h: float
    lf_h: float
    lg_h: np.ndarray
    psi: float
    gamma: float

    def residual(self, u):
        """Constraint value L_f h + L_g h . u + gamma h at input ``u``."""
        return self.lf_h + float(self.lg_h @ np.asarray(u, dtype=float)) + self.gamma * self.h


def relative_state_vertical(state, ego, obs):
    c, s = math.cos(state.theta), math.sin(state.theta)
    l, v, w = ego.l, state.v, state.omega
    p_rel = obs.center - np.array([state.x_p + l * c, state.y_p + l * s])
    v_rel = obs.velocity - np.array([v * c - l * w * s, v * s + l * w * c])
    return p_rel, v_rel


def relative_state_horizontal(state, obs):
    p_rel = obs.center - np.array([state.x_p, state.z_p])
    v_rel = obs.velocity - np.array([state.vx, state.vz])
    return p_rel, v_rel


def _cone_terms(p_rel, v_rel, r):
    """h, the input-free part of hdot for a unit-free vdot, and the vector
    q = p + v * tangent/|v| that multiplies vdot_rel in hdot."""
    _, tangent = _tangent_length(p_rel, r)
    speed = math.hypot(v_rel[0], v_rel[1])
    pv = float(p_rel @ v_rel)
    h = pv + speed * tangent
    if speed <= SPEED_EPS:
        raise DegenerateVelocityError(speed)
    # pdot_rel = v_rel, so <pdot, v> + <p, pdot> |v| / tangent
    drift = speed * speed + pv * speed / tangent
    q = p_rel + v_rel * (tangent / speed)
    return h, drift, q


def _assemble(h, lf_h, lg_h, k, u_ref):
    psi = lf_h + float(lg_h @ u_ref) + k.gamma * h
    return ConstraintEval(h=h, lf_h=lf_h, lg_h=lg_h, psi=psi, gamma=k.gamma)


def eval_constraint_horizontal(state, obs, k, u_ref):
    """Barrier constraint for the x-z double integrator.

    vdot_rel = -(a, a_z), hence L_g h = -q.
    """
    p_rel, v_rel = relative_state_horizontal(state, obs)
    h, drift, q = _cone_terms(p_rel, v_rel, obs.r)
    return _assemble(h, drift, -q, k, u_ref.as_array())


def eval_constraint_vertical(state, ego, obs, k, u_ref):
    """Barrier constraint for the acceleration-controlled unicycle.

    The body point sits ``l`` ahead of the axle, so its acceleration has an
    input-free part (centripetal and transport terms) and an input part
    ``B @ (a, alpha)`` with det(B) = l.
    """
    p_rel, v_rel = relative_state_vertical(state, ego, obs)
    h, drift, q = _cone_terms(p_rel, v_rel, obs.r)
    c, s = math.cos(state.theta), math.sin(state.theta)
    l, v, w = ego.l, state.v, state.omega
    vdot_free = np.array([v * w * s + l * w * w * c, -v * w * c + l * w * w * s])
    b = np.array([[-c, l * s], [-s, -l * c]])
    lf_h = drift + float(q @ vdot_free)
    lg_h = q @ b
    return _assemble(h, lf_h, lg_h, k, u_ref.as_array())
