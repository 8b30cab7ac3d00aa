import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from c3bf.models import (
    EgoParams,
    PlanarInput,
    PlanarState,
    UnicycleInput,
    UnicycleState,
    planar_dynamics,
    step,
    unicycle_dynamics,
    wrap_angle,
)


def test_unicycle_dynamics_examples():
    z = unicycle_dynamics(UnicycleState(1, 2, 0.3, 0, 0), UnicycleInput(0, 0))
    assert np.array_equal(z, np.zeros(5))
    np.testing.assert_allclose(
        unicycle_dynamics(UnicycleState(0, 0, 0, 2, 0), UnicycleInput(1, 0)), [2, 0, 0, 1, 0]
    )
    np.testing.assert_allclose(
        unicycle_dynamics(UnicycleState(0, 0, math.pi / 2, 1, 0.5), UnicycleInput(0, 0)),
        [0, 1, 0.5, 0, 0],
        atol=1e-15,
    )


def test_planar_dynamics_examples():
    assert np.array_equal(planar_dynamics(PlanarState(3, 1, 0, 0), PlanarInput(0, 0)), np.zeros(4))
    np.testing.assert_allclose(
        planar_dynamics(PlanarState(0, 0, 1, -0.2), PlanarInput(0.5, 0.3)), [1, -0.2, 0.5, 0.3]
    )
    np.testing.assert_allclose(
        planar_dynamics(PlanarState(0, 0, 0, 0), PlanarInput(0, -1)), [0, 0, 0, -1]
    )


@pytest.mark.parametrize("method", ["euler", "rk4"])
@pytest.mark.parametrize("dt", [1e-3, 0.1, 2.0])
def test_equilibrium_is_fixed(method, dt):
    s = UnicycleState(1.0, -2.0, 0.4, 0.0, 0.0)
    assert step(s, UnicycleInput(0, 0), dt, method) == s
    p = PlanarState(1.0, 0.5, 0.0, 0.0)
    assert step(p, PlanarInput(0, 0), dt, method) == p


def test_rk4_exact_on_double_integrator():
    s = step(PlanarState(0, 0, 0, 0), PlanarInput(1, 0), 0.1, "rk4")
    assert s.vx == pytest.approx(0.1, abs=1e-15)
    assert s.x_p == pytest.approx(0.005, abs=1e-15)
    assert s.z_p == 0.0 and s.vz == 0.0


@pytest.mark.parametrize("dt", [0.0, -0.01])
def test_step_rejects_nonpositive_dt(dt):
    with pytest.raises(ValueError):
        step(PlanarState(0, 0, 0, 0), PlanarInput(0, 0), dt)


def test_step_rejects_unknown_method():
    with pytest.raises(ValueError):
        step(PlanarState(0, 0, 0, 0), PlanarInput(0, 0), 0.1, "midpoint")


def _roll(state, inp, dt, t_end, method):
    for _ in range(int(round(t_end / dt))):
        state = step(state, inp, dt, method)
    return state


def test_euler_rk4_refinement_gentle_turn():
    # Euler is first order: at dt=1e-4 the two agree to 1e-6 only on slowly varying motion
    s0 = UnicycleState(0, 0, 0.2, 1.0, 0.01)
    u = UnicycleInput(0.0, 0.0)
    a = _roll(s0, u, 1e-4, 1.0, "euler").as_array()
    b = _roll(s0, u, 1e-4, 1.0, "rk4").as_array()
    assert np.max(np.abs(a - b)) < 1e-6


def test_euler_is_first_order():
    s0 = UnicycleState(0, 0, 0.2, 1.0, 0.5)
    u = UnicycleInput(0.3, 0.2)
    ref = _roll(s0, u, 1e-3, 1.0, "rk4").as_array()
    e1 = np.linalg.norm(_roll(s0, u, 0.01, 1.0, "euler").as_array() - ref)
    e2 = np.linalg.norm(_roll(s0, u, 0.005, 1.0, "euler").as_array() - ref)
    assert 1.8 < e1 / e2 < 2.2


def test_rk4_fourth_order_on_unicycle():
    s0 = UnicycleState(0.0, 0.0, 0.1, 1.0, 0.5)
    u = UnicycleInput(0.3, 0.8)

    def rhs(_, x):
        return [x[3] * math.cos(x[2]), x[3] * math.sin(x[2]), x[4], u.accel, u.alpha]

    sol = solve_ivp(rhs, (0, 1), s0.as_array(), method="DOP853", rtol=1e-13, atol=1e-14)
    ref = sol.y[:, -1]
    dts = np.array([0.2, 0.1, 0.05, 0.025])
    errs = [np.linalg.norm(_roll(s0, u, dt, 1.0, "rk4").as_array() - ref) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 3.7 <= slope <= 4.3


@given(
    st.tuples(*[st.floats(-3, 3)] * 4),
    st.tuples(*[st.floats(-3, 3)] * 2),
    st.tuples(*[st.floats(-3, 3)] * 2),
)
def test_planar_superposition(x0, u1, u2):
    s = PlanarState(*x0)
    both = step(s, PlanarInput(u1[0] + u2[0], u1[1] + u2[1]), 0.05).as_array()
    sep = (
        step(s, PlanarInput(*u1), 0.05).as_array()
        + step(s, PlanarInput(*u2), 0.05).as_array()
        - step(s, PlanarInput(0, 0), 0.05).as_array()
    )
    np.testing.assert_allclose(both, sep, atol=1e-12)


@settings(max_examples=50)
@given(st.floats(-math.pi, math.pi), st.floats(-2, 2), st.floats(-1, 1))
def test_unicycle_rotation_equivariance(beta, v, w):
    s0 = UnicycleState(1.0, -0.5, 0.3, v, w)
    u = UnicycleInput(0.2, -0.4)
    c, s = math.cos(beta), math.sin(beta)
    rot = np.array([[c, -s], [s, c]])
    xy = rot @ np.array([s0.x_p, s0.y_p])
    s0r = UnicycleState(xy[0], xy[1], s0.theta + beta, v, w)
    a = _roll(s0, u, 0.05, 1.0, "rk4")
    b = _roll(s0r, u, 0.05, 1.0, "rk4")
    np.testing.assert_allclose(rot @ [a.x_p, a.y_p], [b.x_p, b.y_p], atol=1e-10)
    assert abs(wrap_angle(a.theta + beta - b.theta)) < 1e-10
    assert b.v == pytest.approx(a.v, abs=1e-12) and b.omega == pytest.approx(a.omega, abs=1e-12)


@pytest.mark.parametrize(
    "theta, expected",
    [(math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi), (0.5, 0.5), (-7.0, -7.0 + 2 * math.pi)],
)
def test_wrap_angle(theta, expected):
    assert wrap_angle(theta) == pytest.approx(expected, abs=1e-12)


def test_heading_stays_wrapped_over_long_turns():
    s = UnicycleState(0, 0, 0, 1.0, 2.0)
    for _ in range(2000):
        s = step(s, UnicycleInput(0, 0), 0.01)
        assert -math.pi < s.theta <= math.pi


def test_states_reject_nonfinite():
    with pytest.raises(ValueError):
        PlanarState(0, float("nan"), 0, 0)
    with pytest.raises(ValueError):
        UnicycleInput(float("inf"), 0)


def test_ego_params_validation():
    with pytest.raises(ValueError):
        EgoParams(l=-0.1)
    with pytest.raises(ValueError):
        EgoParams(width=0.0)
