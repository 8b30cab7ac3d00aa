"""Closed-loop scenario simulation with the collision cone safety filter."""

import math
from dataclasses import dataclass, field

import numpy as np

from .config import VERTICAL, ScenarioConfig
from .constraints import (
    ClassK,
    ObstacleState,
    eval_constraint_horizontal,
    eval_constraint_vertical,
    relative_state_horizontal,
    relative_state_vertical,
)
from .errors import DegenerateVelocityError, PenetrationError
from .geometry import h_value
from .models import EgoParams, PlanarInput, UnicycleInput, UnicycleState, step
from .safety_filter import filter_closed_form, filter_qp

_BINDING_TOL = 1e-9


@dataclass(frozen=True)
class ObstacleRecord:
    h: float
    psi: float
    distance: float
    filter_active: bool
    degenerate: bool


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    state: object
    u_ref: np.ndarray
    u_safe: np.ndarray
    obstacles: tuple
    violation: bool


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.summary.get("status") == "ok"


def reference_controller(state, target, gains):
    """PD tracking of constant target velocities.

    Vertical mode tracks forward speed ``v`` and yaw rate ``omega``;
    horizontal mode tracks forward speed ``vx`` and holds height ``z``.
    """
    if isinstance(state, UnicycleState):
        return UnicycleInput(
            accel=gains.kp * (target["v"] - state.v),
            alpha=gains.kp * (target["omega"] - state.omega),
        )
    return PlanarInput(
        accel_x=gains.kp * (target["vx"] - state.vx),
        accel_z=gains.kp * (target["z"] - state.z_p) + gains.kd * (0.0 - state.vz),
    )


def relative_state(state, obs, ego=None):
    if isinstance(state, UnicycleState):
        return relative_state_vertical(state, ego or EgoParams(), obs)
    return relative_state_horizontal(state, obs)


def detect_collision(state, obstacles, ego=None):
    """Return ``(True, index)`` for the first obstacle with |p_rel| <= r,
    else ``(False, None)``. Touching the circle counts as contact."""
    for i, obs in enumerate(obstacles):
        p_rel, _ = relative_state(state, obs, ego)
        if math.hypot(p_rel[0], p_rel[1]) <= obs.r:
            return True, i
    return False, None


def evaluate_constraint(state, ego, obs, k, u_ref):
    if isinstance(state, UnicycleState):
        return eval_constraint_vertical(state, ego, obs, k, u_ref)
    return eval_constraint_horizontal(state, obs, k, u_ref)


def _input_type(state):
    return UnicycleInput if isinstance(state, UnicycleState) else PlanarInput


def obstacles_at(config, t):
    width = config.ego.width
    return [
        ObstacleState.from_ellipse(o.center, o.velocity, o.semi_axes, width).at(t)
        for o in config.obstacles
    ]


def run(config):
    """Simulate ``config`` and return the per-step log plus a summary.

    The run stops at the first contact with an obstacle circle. A
    ``SafetyInfeasibleError`` from the QP propagates to the caller.
    """
    k = ClassK(config.gamma)
    bounds = config.input_bounds()
    in_type = _input_type(config.initial_state)
    state = config.initial_state
    result = ScenarioResult(config)
    n_obs = len(config.obstacles)
    min_h = [math.inf] * n_obs
    min_dist = [math.inf] * n_obs
    radii = [o.r for o in obstacles_at(config, 0.0)]
    active_steps = degenerate_steps = violations = 0
    reason = "completed"
    violation = None

    for i in range(config.n_steps + 1):
        t = i * config.dt
        obstacles = obstacles_at(config, t)
        u_ref = reference_controller(state, config.target, config.pd_gains)
        u_ref_arr = u_ref.as_array()
        hit, _ = detect_collision(state, obstacles, config.ego)

        evals, obs_info = [], []
        for j, obs in enumerate(obstacles):
            p_rel, v_rel = relative_state(state, obs, config.ego)
            dist = math.hypot(p_rel[0], p_rel[1])
            min_dist[j] = min(min_dist[j], dist)
            try:
                ce = evaluate_constraint(state, config.ego, obs, k, u_ref)
            except DegenerateVelocityError:
                h = h_value(p_rel, v_rel, obs.r)
                obs_info.append([h, math.nan, dist, False, True])
                degenerate_steps += 1
            except PenetrationError:
                hit = True
                obs_info.append([math.nan, math.nan, dist, False, False])
            else:
                evals.append((j, ce))
                obs_info.append([ce.h, ce.psi, dist, False, False])
            if not math.isnan(obs_info[-1][0]):
                min_h[j] = min(min_h[j], obs_info[-1][0])

        if hit:
            violations += 1
            reason = "collision"
            j_hit = detect_collision(state, obstacles, config.ego)[1]
            j_hit = 0 if j_hit is None else j_hit
            violation = {
                "t": t,
                "obstacle": j_hit,
                "distance": obs_info[j_hit][2],
                "radius": obstacles[j_hit].r,
            }
            u_safe = u_ref_arr.copy()
        elif not evals:
            u_safe = u_ref_arr.copy() if bounds is None else np.clip(u_ref_arr, bounds.lower, bounds.upper)
        elif len(evals) == 1 and bounds is None:
            u_safe = filter_closed_form(u_ref_arr, evals[0][1]).u_safe
        else:
            u_safe = filter_qp(u_ref_arr, [ce for _, ce in evals], bounds).u_safe

        modified = not np.array_equal(u_safe, u_ref_arr)
        if modified:
            active_steps += 1
            for j, ce in evals:
                obs_info[j][3] = abs(ce.residual(u_safe)) <= _BINDING_TOL * (1.0 + abs(ce.psi))
        result.records.append(
            TrajectoryRecord(
                t=t,
                state=state,
                u_ref=u_ref_arr,
                u_safe=u_safe,
                obstacles=tuple(ObstacleRecord(*info) for info in obs_info),
                violation=hit,
            )
        )
        if hit or i == config.n_steps:
            break
        state = step(state, in_type.from_array(u_safe), config.dt, config.method)

    n = len(result.records)
    result.summary = {
        "name": config.name,
        "mode": config.mode,
        "status": "violation" if violations else "ok",
        "termination": reason,
        "steps": n,
        "t_final": result.records[-1].t,
        "violation_count": violations,
        "violation": violation,
        "min_h": [None if math.isinf(v) else v for v in min_h],
        "min_distance": [None if math.isinf(v) else v for v in min_dist],
        "radius": radii,
        "min_clearance": [None if math.isinf(d) else d - r for d, r in zip(min_dist, radii)],
        "active_fraction": active_steps / n,
        "degenerate_steps": degenerate_steps,
        "final_state": result.records[-1].state.as_array().tolist(),
    }
    return result


def passage_metrics(result):
    """Qualitative passage descriptors used by the scenario reconstructions.

    For each obstacle: the relative position at closest approach expressed
    in the ego's motion frame (``along``, ``lateral``) and whether the
    obstacle ended up behind the ego.
    """
    cfg = result.config
    out = []
    for j in range(len(cfg.obstacles)):
        dists = [rec.obstacles[j].distance for rec in result.records]
        i_min = int(np.argmin(dists))
        metrics = {}
        for label, idx in (("closest", i_min), ("final", len(result.records) - 1)):
            rec = result.records[idx]
            obs = obstacles_at(cfg, rec.t)[j]
            p_rel, _ = relative_state(rec.state, obs, cfg.ego)
            if cfg.mode == VERTICAL:
                heading = np.array([math.cos(rec.state.theta), math.sin(rec.state.theta)])
            else:
                heading = np.array([1.0, 0.0])
            along = float(p_rel @ heading)
            lateral = float(heading[0] * p_rel[1] - heading[1] * p_rel[0])
            metrics[label] = {"along": along, "lateral": lateral}
        metrics["passed"] = metrics["final"]["along"] < 0.0
        out.append(metrics)
    return out
