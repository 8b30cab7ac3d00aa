import math
from dataclasses import replace

import numpy as np
import pytest
import sympy as sp

from c3bf.constraints import (
    ClassK,
    ObstacleState,
    eval_constraint_horizontal,
    eval_constraint_vertical,
    relative_state_horizontal,
    relative_state_vertical,
)
from c3bf.errors import DegenerateVelocityError, PenetrationError
from c3bf.geometry import h_value
from c3bf.models import EgoParams, PlanarInput, PlanarState, UnicycleInput, UnicycleState
from c3bf.verify import (
    fd_hdot_horizontal,
    fd_hdot_vertical,
    sample_horizontal,
    sample_vertical,
    suite_fd_derivative,
    suite_lgh_nonvanishing,
)

K1 = ClassK(1.0)


def test_relative_state_vertical_examples():
    obs = ObstacleState([5.0, 0.0], [0.0, 0.0], 1.0)
    p, v = relative_state_vertical(UnicycleState(0, 0, 0, 1.0, 0), EgoParams(l=0.0), obs)
    np.testing.assert_allclose(p, [5, 0])
    np.testing.assert_allclose(v, [-1, 0])

    obs = ObstacleState([3.0, 0.0], [0.0, 0.0], 1.0)
    p, v = relative_state_vertical(UnicycleState(0, 0, 0, 0.0, 1.0), EgoParams(l=0.2), obs)
    np.testing.assert_allclose(p, [2.8, 0], atol=1e-15)
    np.testing.assert_allclose(v, [0, -0.2], atol=1e-15)

    theta = 0.7
    vel = 1.3 * np.array([math.cos(theta), math.sin(theta)])
    obs = ObstacleState([4.0, 4.0], vel, 1.0)
    _, v = relative_state_vertical(UnicycleState(0, 0, theta, 1.3, 0), EgoParams(l=0.0), obs)
    np.testing.assert_allclose(v, [0, 0], atol=1e-15)


def test_relative_state_horizontal_examples():
    obs = ObstacleState([4.0, 0.1], [0.0, 0.0], 0.3)
    p, v = relative_state_horizontal(PlanarState(0, 0.5, 1.0, 0.0), obs)
    np.testing.assert_allclose(p, [4, -0.4], atol=1e-15)
    np.testing.assert_allclose(v, [-1, 0])

    _, v = relative_state_horizontal(PlanarState(0, 0, 0.4, -0.1), ObstacleState([3, 2], [0.4, -0.1], 1))
    np.testing.assert_allclose(v, [0, 0])

    p, v = relative_state_horizontal(PlanarState(2, 0, 0, 0), ObstacleState([2, 1.5], [0, 0], 0.5))
    assert np.array_equal(v, [0, 0])
    assert h_value(p, v, 0.5) == 0.0


def test_horizontal_worked_example():
    state = PlanarState(0, 0, 1.0, 0.0)
    obs = ObstacleState([5.0, 0.0], [0.0, 0.0], 3.0)
    ce = eval_constraint_horizontal(state, obs, K1, PlanarInput(0, 0))
    assert ce.h == pytest.approx(-1.0, abs=1e-12)
    assert ce.lf_h == pytest.approx(-0.25, abs=1e-12)
    np.testing.assert_allclose(ce.lg_h, [-1.0, 0.0], atol=1e-12)
    assert ce.psi == pytest.approx(-1.25, abs=1e-12)
    for u in ([0.0, 0.0], [0.7, -0.3]):
        inp = PlanarInput(*u)
        fd = fd_hdot_horizontal(state, obs, inp)
        assert ce.lf_h + ce.lg_h @ u == pytest.approx(fd, rel=1e-6)


def test_receding_needs_no_filtering():
    ce = eval_constraint_horizontal(
        PlanarState(0, 0, -1.0, 0.0), ObstacleState([5, 0], [0, 0], 3.0), K1, PlanarInput(0, 0)
    )
    assert ce.h > 0 and ce.psi > 0


def test_vertical_reduces_to_horizontal_axis_when_l_zero():
    state = UnicycleState(0.3, -0.2, 0.0, 0.8, 0.0)
    obs = ObstacleState([4.0, 1.0], [-0.2, 0.1], 0.7)
    ce = eval_constraint_vertical(state, EgoParams(l=0.0), obs, K1, UnicycleInput(0, 0))
    p, v = relative_state_vertical(state, EgoParams(l=0.0), obs)
    tangent = math.sqrt(p @ p - obs.r**2)
    q = p + v * tangent / np.linalg.norm(v)
    assert ce.lg_h[0] == pytest.approx(-q[0], rel=1e-14)
    assert ce.lg_h[1] == 0.0
    horiz = eval_constraint_horizontal(
        PlanarState(state.x_p, state.y_p, state.v, 0.0), obs, K1, PlanarInput(0, 0)
    )
    assert ce.lg_h[0] == pytest.approx(horiz.lg_h[0], rel=1e-14)
    assert ce.lf_h == pytest.approx(horiz.lf_h, rel=1e-14)


def test_degenerate_relative_velocity():
    obs = ObstacleState([5.0, 0.0], [0.0, 0.0], 1.0)
    with pytest.raises(DegenerateVelocityError):
        eval_constraint_vertical(UnicycleState(0, 0, 0, 0, 0), EgoParams(), obs, K1, UnicycleInput(1, 0))
    with pytest.raises(DegenerateVelocityError):
        eval_constraint_horizontal(PlanarState(0, 0, 0, 0), obs, K1, PlanarInput(1, 0))


def test_penetration_is_reported_before_degeneracy():
    obs = ObstacleState([0.5, 0.0], [0.0, 0.0], 1.0)
    with pytest.raises(PenetrationError):
        eval_constraint_horizontal(PlanarState(0, 0, 0, 0), obs, K1, PlanarInput(0, 0))


def test_obstacle_advances_at_constant_velocity():
    obs = ObstacleState([1.0, 2.0], [0.5, -1.0], 0.3)
    np.testing.assert_allclose(obs.at(2.0).center, [2.0, 0.0])
    assert obs.at(2.0).r == obs.r
    np.testing.assert_allclose(
        ObstacleState.from_ellipse([0, 0], [0, 0], (1.2, 0.55), 0.24).r, 1.32, atol=1e-12
    )


def test_class_k_rejects_nonpositive_gamma():
    with pytest.raises(ValueError):
        ClassK(0.0)


@pytest.mark.parametrize("mode", ["horizontal", "vertical"])
def test_psi_identity_and_h_consistency(mode):
    rng = np.random.default_rng(21)
    for _ in range(2000):
        gamma = rng.uniform(0.1, 4)
        k = ClassK(gamma)
        if mode == "horizontal":
            state, obs, u = sample_horizontal(rng)
            ce = eval_constraint_horizontal(state, obs, k, u)
            p, v = relative_state_horizontal(state, obs)
        else:
            state, ego, obs, u = sample_vertical(rng)
            ce = eval_constraint_vertical(state, ego, obs, k, u)
            p, v = relative_state_vertical(state, ego, obs)
        assert ce.psi - (ce.lf_h + ce.lg_h @ u.as_array() + gamma * ce.h) == 0.0
        assert ce.h == h_value(p, v, obs.r)
        assert np.all(np.isfinite(ce.lg_h))


@pytest.mark.parametrize("mode", ["horizontal", "vertical"])
def test_lgh_nonvanishing(mode):
    rep = suite_lgh_nonvanishing(mode, 5000, seed=1)
    assert rep.passed and rep.worst > 0


@pytest.mark.parametrize("mode", ["horizontal", "vertical"])
def test_fd_derivative_agrees(mode):
    rep = suite_fd_derivative(mode, 2000, seed=2)
    assert rep.passed, rep.counterexample
    assert rep.worst < 1e-4


@pytest.mark.parametrize("mode", ["horizontal", "vertical"])
def test_fd_suite_detects_sign_flip(mode):
    rep = suite_fd_derivative(mode, 200, seed=2, inject_fault=True)
    assert rep.failures == 200
    assert rep.counterexample is not None


def _symbolic_vertical():
    """Independent derivation of L_f h and L_g h by symbolic differentiation."""
    x, y, th, v, w, a, al = sp.symbols("x y theta v omega a alpha", real=True)
    cx, cy, vx, vy, l, r = sp.symbols("c_x c_y cdot_x cdot_y l r", real=True)
    p = sp.Matrix([cx - (x + l * sp.cos(th)), cy - (y + l * sp.sin(th))])
    vr = sp.Matrix([vx - (v * sp.cos(th) - l * sp.sin(th) * w), vy - (v * sp.sin(th) + l * sp.cos(th) * w)])
    h = p.dot(vr) + sp.sqrt(vr.dot(vr)) * sp.sqrt(p.dot(p) - r**2)
    state = [x, y, th, v, w, cx, cy]
    flow = [v * sp.cos(th), v * sp.sin(th), w, a, al, vx, vy]
    hdot = sum(sp.diff(h, s) * f for s, f in zip(state, flow))
    lg = [sp.diff(hdot, a), sp.diff(hdot, al)]
    lf = hdot.subs({a: 0, al: 0})
    args = (x, y, th, v, w, cx, cy, vx, vy, l, r)
    return sp.lambdify(args, lf), sp.lambdify(args, lg)


def test_vertical_lie_derivatives_match_symbolic_derivation():
    lf_fn, lg_fn = _symbolic_vertical()
    rng = np.random.default_rng(9)
    for _ in range(200):
        state, ego, obs, u = sample_vertical(rng, well_conditioned=True)
        ce = eval_constraint_vertical(state, ego, obs, K1, u)
        args = (*state.as_array(), *obs.center, *obs.velocity, ego.l, obs.r)
        assert ce.lf_h == pytest.approx(lf_fn(*args), rel=1e-9, abs=1e-12)
        np.testing.assert_allclose(ce.lg_h, lg_fn(*args), rtol=1e-9, atol=1e-12)


def test_fd_along_flow_for_a_moving_obstacle():
    state = UnicycleState(0.0, 0.0, 0.4, 0.9, -0.3)
    ego = EgoParams(l=0.25)
    obs = ObstacleState([3.0, 2.0], [-0.4, 0.2], 0.6)
    u = UnicycleInput(0.5, -1.2)
    ce = eval_constraint_vertical(state, ego, obs, K1, u)
    fd = fd_hdot_vertical(state, ego, obs, u)
    assert ce.lf_h + ce.lg_h @ u.as_array() == pytest.approx(fd, rel=1e-6)
    faulty = replace(ce, lg_h=-ce.lg_h)
    assert faulty.lf_h + faulty.lg_h @ u.as_array() != pytest.approx(fd, rel=1e-3)
