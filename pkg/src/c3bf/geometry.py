"""Collision cone geometry.

Relative vectors follow the convention ``p_rel = c_obstacle - p_ego`` and
``v_rel = v_obstacle - v_ego``. The barrier value

    h = <p_rel, v_rel> + |p_rel| |v_rel| cos(phi)

is negative exactly when ``v_rel`` points into the collision cone, i.e. the
obstacle is closing on the ego along a line that hits its bounding circle.
"""

import math

import numpy as np

from .errors import InvalidGeometryError, PenetrationError

# guard band on |p_rel| > r; keeps sqrt(|p|^2 - r^2) away from zero
RADIUS_EPS = 1e-9


def as_vec2(v):
    out = np.asarray(v, dtype=float).reshape(-1)
    if out.shape != (2,):
        raise InvalidGeometryError(f"expected a 2-vector, got shape {np.shape(v)}")
    if not np.all(np.isfinite(out)):
        raise InvalidGeometryError(f"non-finite vector component: {out}")
    return out


def effective_radius(semi_axis_1, semi_axis_2, ego_width=0.0):
    """Radius of the conservative circle around an elliptical obstacle,
    inflated by half the ego width."""
    if not (semi_axis_1 > 0 and semi_axis_2 > 0):
        raise InvalidGeometryError(
            f"semi-axes must be positive, got ({semi_axis_1}, {semi_axis_2})"
        )
    if not ego_width >= 0:
        raise InvalidGeometryError(f"ego width must be nonnegative, got {ego_width}")
    return max(semi_axis_1, semi_axis_2) + 0.5 * ego_width


def _tangent_length(p_rel, r):
    # distance from the ego to the tangent points, sqrt(|p|^2 - r^2)
    if not r > 0:
        raise InvalidGeometryError(f"cone radius must be positive, got {r}")
    dist = math.hypot(p_rel[0], p_rel[1])
    if dist <= r + RADIUS_EPS:
        raise PenetrationError(dist, r)
    return dist, math.sqrt(dist * dist - r * r)


def cos_half_angle(p_rel, r):
    """Cosine of the collision cone half-angle seen from the ego."""
    p = as_vec2(p_rel)
    dist, tangent = _tangent_length(p, r)
    return tangent / dist


def h_value(p_rel, v_rel, r):
    """Collision cone barrier value for one obstacle."""
    p = as_vec2(p_rel)
    v = as_vec2(v_rel)
    _, tangent = _tangent_length(p, r)
    return float(p @ v) + math.hypot(v[0], v[1]) * tangent


def in_collision_cone(p_rel, v_rel, r):
    """True when v_rel lies strictly inside the cone (h < 0)."""
    return h_value(p_rel, v_rel, r) < 0.0
