"""Randomized property suites for the barrier constraints and the filters.

Each suite returns a ``SuiteReport``; the first failing sample is kept in a
JSON-ready form so it can be replayed.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import (
    ClassK,
    ConstraintEval,
    ObstacleState,
    eval_constraint_horizontal,
    eval_constraint_vertical,
    relative_state_horizontal,
    relative_state_vertical,
)
from .geometry import RADIUS_EPS, h_value
from .models import (
    RK4,
    EgoParams,
    PlanarInput,
    PlanarState,
    UnicycleInput,
    UnicycleState,
    _planar_rhs,
    _unicycle_rhs,
    integrate,
)
from .safety_filter import filter_closed_form, filter_qp

FD_STEP = 1e-6
FD_RTOL = 1e-4
QP_ATOL = 1e-8


@dataclass
class SuiteReport:
    name: str
    samples: int
    failures: int = 0
    worst: float = 0.0
    worst_label: str = ""
    extra: dict = field(default_factory=dict)
    counterexample: dict = None

    @property
    def passed(self):
        return self.failures == 0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{status} {self.name}: {self.samples} samples, {self.failures} failures",
                 f"{self.worst_label}={self.worst:.3e}"]
        parts += [f"{k}={v:.3e}" for k, v in self.extra.items()]
        return ", ".join(parts)

    def to_dict(self):
        return {
            "name": self.name,
            "samples": self.samples,
            "failures": self.failures,
            "passed": self.passed,
            self.worst_label or "worst": self.worst,
            **self.extra,
            "counterexample": self.counterexample,
        }


def _unit(rng):
    a = rng.uniform(-math.pi, math.pi)
    return np.array([math.cos(a), math.sin(a)])


def _distance_and_speed(rng, r, well_conditioned):
    if well_conditioned:
        return r * rng.uniform(1.05, 6.0), rng.uniform(0.1, 3.0)
    dist = r + RADIUS_EPS + 10.0 ** rng.uniform(-8.0, 1.0)
    speed = 1e-8 * (1.0 + 1e-6) + 10.0 ** rng.uniform(-8.0, 1.0)
    return dist, speed


def sample_horizontal(rng, well_conditioned=False):
    """A random (state, obstacle, input) with |p_rel| > r and |v_rel| > 1e-8."""
    r = rng.uniform(0.1, 2.0)
    dist, speed = _distance_and_speed(rng, r, well_conditioned)
    p_rel, v_rel = dist * _unit(rng), speed * _unit(rng)
    state = PlanarState(*rng.uniform(-5, 5, 2), *rng.normal(0, 1, 2))
    pos, vel = np.array([state.x_p, state.z_p]), np.array([state.vx, state.vz])
    obs = ObstacleState(pos + p_rel, vel + v_rel, r)
    return state, obs, PlanarInput(*rng.normal(0, 2, 2))


def sample_vertical(rng, well_conditioned=False):
    r = rng.uniform(0.1, 2.0)
    dist, speed = _distance_and_speed(rng, r, well_conditioned)
    p_rel, v_rel = dist * _unit(rng), speed * _unit(rng)
    ego = EgoParams(l=rng.uniform(0.05, 0.5), width=0.4)
    state = UnicycleState(
        *rng.uniform(-5, 5, 2), rng.uniform(-math.pi, math.pi), rng.normal(0, 1), rng.normal(0, 1)
    )
    c, s = math.cos(state.theta), math.sin(state.theta)
    body = np.array([state.x_p + ego.l * c, state.y_p + ego.l * s])
    body_vel = np.array(
        [state.v * c - ego.l * state.omega * s, state.v * s + ego.l * state.omega * c]
    )
    obs = ObstacleState(body + p_rel, body_vel + v_rel, r)
    return state, ego, obs, UnicycleInput(*rng.normal(0, 2, 2))


def fd_hdot_horizontal(state, obs, u, delta=FD_STEP):
    """Central difference of h along the simulated closed-loop flow."""
    vals = []
    for sgn in (1.0, -1.0):
        x = integrate(_planar_rhs, state.as_array(), u.as_array(), sgn * delta, RK4)
        p_rel, v_rel = relative_state_horizontal(PlanarState.from_array(x), obs.at(sgn * delta))
        vals.append(h_value(p_rel, v_rel, obs.r))
    return (vals[0] - vals[1]) / (2.0 * delta)


def fd_hdot_vertical(state, ego, obs, u, delta=FD_STEP):
    vals = []
    for sgn in (1.0, -1.0):
        x = integrate(_unicycle_rhs, state.as_array(), u.as_array(), sgn * delta, RK4)
        p_rel, v_rel = relative_state_vertical(UnicycleState.from_array(x), ego, obs.at(sgn * delta))
        vals.append(h_value(p_rel, v_rel, obs.r))
    return (vals[0] - vals[1]) / (2.0 * delta)


def _flip_lg(fn):
    """Mutation used to smoke-test the suites: negate L_g h."""

    def wrapped(*args):
        ce = fn(*args)
        return replace(ce, lg_h=-ce.lg_h)

    return wrapped


def _evaluators(inject_fault):
    ev_h, ev_v = eval_constraint_horizontal, eval_constraint_vertical
    if inject_fault:
        ev_h, ev_v = _flip_lg(ev_h), _flip_lg(ev_v)
    return ev_h, ev_v


def _describe(state, obs, u, ego=None, **values):
    out = {
        "state": dict(zip(type(state).field_names(), state.as_array().tolist())),
        "obstacle": {"center": obs.center.tolist(), "velocity": obs.velocity.tolist(), "r": obs.r},
        "input": u.as_array().tolist(),
    }
    if ego is not None:
        out["ego"] = {"l": ego.l, "width": ego.width}
    out.update({k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in values.items()})
    return out


def suite_lgh_nonvanishing(mode, samples, seed=0, inject_fault=False):
    rng = np.random.default_rng(seed)
    ev_h, ev_v = _evaluators(inject_fault)
    k = ClassK(1.0)
    report = SuiteReport(f"lgh_nonvanishing[{mode}]", samples, worst=math.inf, worst_label="min_norm")
    for _ in range(samples):
        if mode == "horizontal":
            state, obs, u = sample_horizontal(rng)
            ego, ce = None, ev_h(state, obs, k, u)
        else:
            state, ego, obs, u = sample_vertical(rng)
            ce = ev_v(state, ego, obs, k, u)
        norm = float(np.linalg.norm(ce.lg_h))
        report.worst = min(report.worst, norm)
        if not (norm > 0.0 and math.isfinite(norm)):
            report.failures += 1
            if report.counterexample is None:
                report.counterexample = _describe(state, obs, u, ego, lg_h=ce.lg_h)
    return report


def suite_fd_derivative(mode, samples, seed=0, inject_fault=False, rtol=FD_RTOL, delta=FD_STEP):
    rng = np.random.default_rng(seed)
    ev_h, ev_v = _evaluators(inject_fault)
    k = ClassK(1.0)
    report = SuiteReport(f"fd_derivative[{mode}]", samples, worst_label="max_rel_err")
    for _ in range(samples):
        if mode == "horizontal":
            state, obs, u = sample_horizontal(rng, well_conditioned=True)
            ego, ce = None, ev_h(state, obs, k, u)
            fd = fd_hdot_horizontal(state, obs, u, delta)
        else:
            state, ego, obs, u = sample_vertical(rng, well_conditioned=True)
            ce = ev_v(state, ego, obs, k, u)
            fd = fd_hdot_vertical(state, ego, obs, u, delta)
        analytic = ce.lf_h + float(ce.lg_h @ u.as_array())
        rel = abs(analytic - fd) / max(abs(analytic), abs(fd))
        report.worst = max(report.worst, rel)
        if not rel < rtol:
            report.failures += 1
            if report.counterexample is None:
                report.counterexample = _describe(
                    state, obs, u, ego, hdot_analytic=analytic, hdot_fd=fd, rel_err=rel
                )
    return report


def random_constraint(rng, u_ref, gamma=None):
    """A random single constraint evaluated at ``u_ref``; psi takes both signs."""
    lg = rng.normal(0, 1, 2) * 10.0 ** rng.uniform(-2, 1)
    h = rng.normal(0, 2)
    gamma = rng.uniform(0.1, 5.0) if gamma is None else gamma
    lf = rng.normal(0, 3)
    psi = lf + float(lg @ u_ref) + gamma * h
    return ConstraintEval(h=h, lf_h=lf, lg_h=lg, psi=psi, gamma=gamma)


def suite_qp_closed_form(samples, seed=0, atol=QP_ATOL):
    rng = np.random.default_rng(seed)
    report = SuiteReport("qp_vs_closed_form", samples, worst_label="max_abs_diff")
    boundary = 0.0
    n_active = 0
    for _ in range(samples):
        u_ref = rng.normal(0, 3, 2)
        ce = random_constraint(rng, u_ref)
        cf = filter_closed_form(u_ref, ce)
        qp = filter_qp(u_ref, [ce])
        diff = float(np.max(np.abs(cf.u_safe - qp.u_safe)))
        resid = abs(ce.residual(cf.u_safe)) if cf.active else 0.0
        n_active += cf.active
        report.worst = max(report.worst, diff)
        boundary = max(boundary, resid)
        if not (diff <= atol and resid <= atol and cf.active == qp.active):
            report.failures += 1
            if report.counterexample is None:
                report.counterexample = {
                    "u_ref": u_ref.tolist(),
                    "constraint": {"h": ce.h, "lf_h": ce.lf_h, "lg_h": ce.lg_h.tolist(),
                                   "psi": ce.psi, "gamma": ce.gamma},
                    "closed_form": cf.u_safe.tolist(),
                    "qp": qp.u_safe.tolist(),
                }
    report.extra = {"max_boundary_residual": boundary, "active_fraction": n_active / max(samples, 1)}
    return report


def run_all(samples, seed=0, inject_fault=False):
    """Run every suite; seeds are offset per suite so samples are independent."""
    return [
        suite_lgh_nonvanishing("horizontal", samples, seed, inject_fault),
        suite_lgh_nonvanishing("vertical", samples, seed + 1, inject_fault),
        suite_fd_derivative("horizontal", samples, seed + 2, inject_fault),
        suite_fd_derivative("vertical", samples, seed + 3, inject_fault),
        suite_qp_closed_form(samples, seed + 4),
    ]
