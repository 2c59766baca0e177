import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sldo.checks import MIN_OFFSET, identity_residuals, probe_states
from sldo.errors import InvalidArgumentError
from sldo.fuzzy import T2nfsNet, downgrade_to_type1, init_network, network_output
from sldo.learning import LearnerState, adapt_step, smooth_sign, taun_rate_residual, track_inputs


def step(net, learner, xi1, xi2, s, dt=1e-3, xi_dot=(0.0, 0.0)):
    _, fs = network_output(net, xi1, xi2)
    return adapt_step(net, learner, xi1, xi2, xi_dot[0], xi_dot[1], s, fs, dt)


def trained_net(seed=3):
    rng = np.random.default_rng(seed)
    net = init_network()
    return net.replace(f=rng.normal(0, 1, 9))


@pytest.mark.parametrize("s, want", [(0.0, 0.0), (0.05, 0.5), (-0.05, -0.5)])
def test_smooth_sign_examples(s, want):
    assert smooth_sign(s, 0.05) == pytest.approx(want)


@given(st.floats(-1e6, 1e6), st.floats(1e-6, 10))
def test_smooth_sign_odd_and_bounded(s, delta):
    assert smooth_sign(-s, delta) == -smooth_sign(s, delta)
    assert abs(smooth_sign(s, delta)) < 1.0


def test_alpha_frozen_inside_deadzone():
    res = step(trained_net(), LearnerState(), 0.4, -0.3, s=0.049)
    assert res.learner.alpha == 0.05


def test_alpha_increment():
    res = step(trained_net(), LearnerState(), 0.4, -0.3, s=1.0)
    assert res.learner.alpha - 0.05 == pytest.approx(1e-6, rel=1e-9)


def test_zero_surface_moves_only_centers():
    net = trained_net()
    res = step(net, LearnerState(), 0.4, -0.3, s=0.0, xi_dot=(2.0, -1.0))
    dp = res.net.params - net.params
    np.testing.assert_allclose(dp[:2, :3], 2.0e-3)
    np.testing.assert_allclose(dp[:2, 3:], -1.0e-3)
    assert np.array_equal(dp[2:], np.zeros_like(dp[2:]))
    assert np.array_equal(res.net.f, net.f) and res.net.q == net.q
    assert res.learner.alpha == 0.05


def test_dt_must_be_positive():
    net = trained_net()
    _, fs = network_output(net, 0.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        adapt_step(net, LearnerState(), 0.0, 0.0, 0.0, 0.0, 1.0, fs, 0.0)


@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-5, 5), st.floats(0.05, 5))
@settings(max_examples=200)
def test_clamps_hold(xi1, xi2, s, alpha):
    res = step(trained_net(), LearnerState(alpha=alpha), xi1, xi2, s, dt=0.05)
    assert res.net.params[2:].min() >= 1e-3
    assert 0.0 <= res.net.q <= 1.0
    assert res.learner.alpha >= alpha


def test_sigma_clamp_can_be_disabled_for_fault_injection():
    net = init_network()
    res = step(net, LearnerState(alpha=2.0, clamp_sigma=False), 0.1, 0.1, s=3.0, dt=0.05)
    assert res.net.params[2:].min() < 1e-3


def test_type1_pairs_stay_tied():
    net = downgrade_to_type1(trained_net())
    for s in (1.0, -0.7, 0.3):
        net = step(net, LearnerState(), 0.7, -1.2, s).net
    p = net.params
    assert np.array_equal(p[0], p[1]) and np.array_equal(p[2], p[3])


def test_adapt_is_deterministic():
    a = step(trained_net(), LearnerState(), 0.4, -0.3, 0.8)
    b = step(trained_net(), LearnerState(), 0.4, -0.3, 0.8)
    assert a.net == b.net and a.learner == b.learner


def test_track_inputs_shifts_centers_only():
    net = trained_net()
    moved = track_inputs(net, 0.5, -0.25)
    np.testing.assert_allclose(moved.params[:2, :3] - net.params[:2, :3], 0.5)
    np.testing.assert_allclose(moved.params[:2, 3:] - net.params[:2, 3:], -0.25)
    assert np.array_equal(moved.params[2:], net.params[2:])


def test_residual_zero_surface():
    net = trained_net()
    res = step(net, LearnerState(), 0.4, -0.3, s=0.0)
    assert taun_rate_residual(net, res.net, 0.4, -0.3, 0.05, 0.0, 0.05, 1e-3) == pytest.approx(0.0, abs=1e-12)


def test_identity_on_guard_free_probes():
    rel = identity_residuals(probe_states(150, seed=11, min_offset=MIN_OFFSET))
    assert rel.size >= 100
    assert rel.max() <= 0.05


def test_residual_scales_with_step():
    # first-order Euler: halving the step roughly halves the residual
    probes = probe_states(60, seed=5, min_offset=1.0)
    r1 = identity_residuals(probes, h=1e-3)
    r2 = identity_residuals(probes, h=5e-4)
    ratio = np.median(r1 / r2)
    assert 1.6 < ratio < 2.4


@pytest.mark.parametrize("kw", [dict(alpha=0.0), dict(gamma_alpha=-1.0), dict(delta=0.0), dict(sigma_min=0.0)])
def test_learner_validation(kw):
    with pytest.raises(InvalidArgumentError):
        LearnerState(**kw)
