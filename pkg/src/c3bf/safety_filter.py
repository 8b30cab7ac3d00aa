"""Minimal-deviation safety filters.

Both filters solve

    min |u - u_ref|^2   s.t.   L_f h_i + L_g h_i . u + gamma_i h_i >= 0

The closed form handles one unbounded constraint; the QP handles any
number of constraints plus box bounds on the input. Written in terms of the
correction ``d = u - u_ref`` each constraint reads ``L_g h_i . d + psi_i >= 0``.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConstraintError, SafetyInfeasibleError

_FEAS_TOL = 1e-10
_DET_TOL = 1e-14


@dataclass(frozen=True)
class InputBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise ValueError("lower and upper bounds must have the same shape")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("bounds must not be NaN")
        if np.any(lower > upper):
            raise ValueError(f"lower bound exceeds upper bound: {lower} > {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unbounded(cls, dim=2):
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    def is_unbounded(self):
        return bool(np.all(np.isneginf(self.lower)) and np.all(np.isposinf(self.upper)))


@dataclass(frozen=True)
class FilterResult:
    u_safe: np.ndarray
    active: bool
    psi: float
    h: float


def _check_lg(c):
    lg = np.asarray(c.lg_h, dtype=float)
    if not np.all(np.isfinite(lg)) or not np.any(lg):
        raise InvalidConstraintError(f"L_g h must be finite and nonzero, got {lg}")
    return lg


def filter_closed_form(u_ref, c):
    """Single-constraint switching law.

    No correction while ``psi >= 0``; otherwise project ``u_ref`` onto the
    constraint boundary along ``L_g h``.
    """
    u_ref = np.asarray(u_ref, dtype=float)
    lg = _check_lg(c)
    if c.psi >= 0.0:
        return FilterResult(u_safe=u_ref.copy(), active=False, psi=c.psi, h=c.h)
    u_safe = u_ref - lg * (c.psi / float(lg @ lg))
    return FilterResult(u_safe=u_safe, active=True, psi=c.psi, h=c.h)


def _halfplanes(u_ref, constraints, bounds):
    """Rows (a, b) meaning a . d >= b on the correction d = u - u_ref."""
    rows = [(_check_lg(c), -c.psi) for c in constraints]
    n = len(rows)
    if bounds is not None:
        for j in range(u_ref.size):
            e = np.zeros(u_ref.size)
            e[j] = 1.0
            if np.isfinite(bounds.lower[j]):
                rows.append((e, bounds.lower[j] - u_ref[j]))
            if np.isfinite(bounds.upper[j]):
                rows.append((-e, u_ref[j] - bounds.upper[j]))
    return rows, n


def _feasible(d, rows):
    for a, b in rows:
        if a @ d - b < -_FEAS_TOL * (1.0 + abs(b) + float(np.abs(a) @ np.abs(d))):
            return False
    return True


def filter_qp(u_ref, constraints, bounds=None):
    """Exact active-set solve of the two-variable filtering QP.

    The minimizer of a strictly convex quadratic in the plane lies at the
    unconstrained point, at the projection onto one constraint line, or at
    the intersection of two; every candidate is enumerated and the closest
    feasible one returned.
    """
    u_ref = np.asarray(u_ref, dtype=float)
    constraints = list(constraints)
    if not constraints:
        raise ValueError("filter_qp needs at least one constraint")
    if u_ref.size != 2:
        raise ValueError("filter_qp is specialised to two inputs")
    rows, n_cbf = _halfplanes(u_ref, constraints, bounds)

    candidates = [np.zeros(2)]
    for a, b in rows:
        candidates.append(a * (b / float(a @ a)))
    for (a1, b1), (a2, b2) in itertools.combinations(rows, 2):
        m = np.vstack([a1, a2])
        if abs(np.linalg.det(m)) > _DET_TOL * (a1 @ a1) * (a2 @ a2):
            candidates.append(np.linalg.solve(m, np.array([b1, b2])))

    best = None
    for d in candidates:
        if _feasible(d, rows) and (best is None or d @ d < best @ best):
            best = d

    worst = min(range(n_cbf), key=lambda i: constraints[i].psi)
    if best is None:
        probe = u_ref if bounds is None else np.clip(u_ref, bounds.lower, bounds.upper)
        resid = [c.residual(probe) for c in constraints]
        idx = int(np.argmin(resid))
        raise SafetyInfeasibleError(
            f"no input satisfies all constraints and bounds; constraint {idx} "
            f"violated by {-resid[idx]:.6g} at the bounded reference input",
            constraint_index=idx,
            violation=-resid[idx],
        )
    if not np.any(best):
        return FilterResult(u_ref.copy(), False, constraints[worst].psi, constraints[worst].h)
    return FilterResult(u_ref + best, True, constraints[worst].psi, constraints[worst].h)
