import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sldo.control import ControllerGains, flc_traditional, flc_with_observer, homogeneous_error
from sldo.errors import InvalidArgumentError, SingularInputGainError
from sldo.plant import DUFFING, PlantModel

G = ControllerGains()
state = st.tuples(st.floats(-3, 3), st.floats(-3, 3))


def test_zero_drift_at_reference():
    flat = PlantModel(a_fn=lambda x: 0.0, b_fn=lambda x: 1.0, name="flat")
    assert flc_traditional((0.0, 0.0), 0.0, G, flat) == 0.0


def test_initial_input_hand_value():
    # -(2.6 - 25 (0 - (-1)) - 50 (0 - 1)) = -(2.6 - 25 + 50)
    assert flc_traditional((1.0, -1.0), 0.0, G, DUFFING) == pytest.approx(-27.6)


@given(state, st.floats(0, 10))
def test_observer_with_zero_estimate_is_traditional(x, t):
    assert flc_with_observer(x, t, G, DUFFING, 0.0) == flc_traditional(x, t, G, DUFFING)


@given(state, st.floats(0, 10), st.floats(-5, 5))
def test_perfect_estimate_cancels(x, t, d):
    u = flc_with_observer(x, t, G, DUFFING, d)
    x2dot = DUFFING.dynamics(x, u, d, t)[1]
    assert x2dot == pytest.approx(-50.0 * x[0] - 25.0 * x[1], abs=1e-9)


def _closed_loop(d, d_hat, t_final, dt, x0=(1.0, 0.0)):
    x = np.array(x0, dtype=float)
    xs = []
    for k in range(int(round(t_final / dt))):
        t = k * dt
        xs.append(x[0])
        u = flc_with_observer(x, t, G, DUFFING, d_hat)
        x = x + dt * DUFFING.dynamics(x, u, d, t)
    return np.array(xs)


def test_perfect_feedforward_matches_homogeneous_response():
    dt = 1e-4
    x1 = _closed_loop(2.0, 2.0, 2.0, dt)
    t = np.arange(x1.size) * dt
    want = np.array([-homogeneous_error(-1.0, 0.0, 50.0, 25.0, tk) for tk in t])
    assert np.max(np.abs(x1 - want)) < 1e-3


def test_constant_disturbance_offset():
    x1 = _closed_loop(3.0, 0.0, 6.0, 1e-3, x0=(0.0, 0.0))
    e_ss = -x1[-1]
    assert e_ss == pytest.approx(-0.06, rel=0.01)


def test_estimate_offset_gives_proportional_error():
    c = 0.5
    x1 = _closed_loop(3.0, 3.0 + c, 6.0, 1e-3, x0=(0.0, 0.0))
    assert -x1[-1] == pytest.approx(c / 50.0, rel=0.01)


@pytest.mark.parametrize("k1,k2", [(0.0, 1.0), (1.0, -1.0)])
def test_gains_must_be_positive(k1, k2):
    with pytest.raises(InvalidArgumentError):
        ControllerGains(k1, k2)


def test_singular_input_gain():
    dead = PlantModel(a_fn=lambda x: 0.0, b_fn=lambda x: 1e-12, name="dead")
    with pytest.raises(SingularInputGainError):
        flc_traditional((0.0, 0.0), 0.0, G, dead)
    with pytest.raises(SingularInputGainError):
        flc_with_observer((0.0, 0.0), 0.0, G, dead, 1.0)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.0, 3.0))
def test_homogeneous_error_initial_conditions(e0, ed0, t):
    assert homogeneous_error(e0, ed0, 50.0, 25.0, 0.0) == pytest.approx(e0, abs=1e-12)
    h = 1e-6
    slope = (homogeneous_error(e0, ed0, 50.0, 25.0, h) - homogeneous_error(e0, ed0, 50.0, 25.0, 0.0)) / h
    assert slope == pytest.approx(ed0, abs=1e-3 * (1 + abs(e0) + abs(ed0)))


@pytest.mark.parametrize("k1,k2", [(50.0, 25.0), (4.0, 4.0), (10.0, 1.0)])
def test_homogeneous_error_solves_ode(k1, k2):
    h, t = 1e-4, 0.3
    e = [homogeneous_error(1.0, -0.5, k1, k2, t + i * h) for i in (-1, 0, 1)]
    edd = (e[2] - 2 * e[1] + e[0]) / h**2
    ed = (e[2] - e[0]) / (2 * h)
    assert edd + k2 * ed + k1 * e[1] == pytest.approx(0.0, abs=1e-4)
