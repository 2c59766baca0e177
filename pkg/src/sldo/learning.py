"""Sliding-mode adaptation of the type-2 network and its learning rate.

With sg = alpha * smooth_sign(s), every parameter moves by one Euler step of

    c'     = xi' + (xi - c) sg
    sigma' = -(sigma + sigma^3 / (xi - c)^2) sg
    f'     = -v / (v . v) sg,           v = q wt_lower + (1 - q) wt_upper
    q'     = -sg / (F . (wt_lower - wt_upper))
    alpha' = gamma_alpha |s|            (only outside the dead-zone |s| < eps)

The center and width laws keep every normalized firing strength constant, so
at frozen inputs the network output moves at exactly -2 sg
(``taun_rate_residual`` measures how far one discrete step departs from that).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from sldo.errors import DivergenceError, InvalidArgumentError
from sldo.fuzzy import FiringState, T2nfsNet, network_output


@dataclass(frozen=True)
class LearnerState:
    alpha: float = 0.05
    gamma_alpha: float = 0.001
    delta: float = 0.05
    epsilon_deadzone: float = 0.05
    sigma_min: float = 1e-3
    denom_floor: float = 1e-6
    # fault-injection hook for the invariant checks; always True in real runs
    clamp_sigma: bool = True

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")
        if not self.gamma_alpha >= 0:
            raise InvalidArgumentError(f"gamma_alpha must be non-negative, got {self.gamma_alpha}")
        if not self.delta > 0:
            raise InvalidArgumentError(f"delta must be positive, got {self.delta}")
        if not self.epsilon_deadzone >= 0:
            raise InvalidArgumentError("epsilon_deadzone must be non-negative")
        if not (self.sigma_min > 0 and self.denom_floor > 0):
            raise InvalidArgumentError("sigma_min and denom_floor must be positive")


class AdaptResult(NamedTuple):
    net: T2nfsNet
    learner: LearnerState
    # True when a clamp fired or a guarded update was skipped this step
    saturated: bool


def smooth_sign(s: float, delta: float) -> float:
    return s / (abs(s) + delta)


def _adapt_memberships(net: T2nfsNet, xi, xi_dot, sg, dt, learner):
    """Center and width laws for every set; returns (params, saturated).

    ``xi`` and ``xi_dot`` are per-column vectors matching the parameter block.
    """
    p = net.params
    new = np.empty_like(p)
    off = xi - p[:2]
    new[:2] = p[:2] + dt * (xi_dot + off * sg)
    if sg == 0.0:
        new[2:] = p[2:]
        return new, False
    off2 = off * off
    sig = p[2:]
    saturated = False
    if off2.min() >= learner.denom_floor:
        new[2:] = sig - dt * (sig + sig**3 / off2) * sg
    else:
        ok = off2 >= learner.denom_floor
        new[2:] = np.where(ok, sig - dt * (sig + sig**3 / np.where(ok, off2, 1.0)) * sg, sig)
        saturated = True
    if learner.clamp_sigma and new[2:].min() < learner.sigma_min:
        np.maximum(new[2:], learner.sigma_min, out=new[2:])
        saturated = True
    if net.type1:
        new[1] = new[0]
        new[3] = new[2]
    if not math.isfinite(new.sum()):
        bad = np.argwhere(~np.isfinite(new))[0]
        names = ("c_lower", "c_upper", "sigma_lower", "sigma_upper")
        col = int(bad[1])
        label = f"{names[bad[0]]}_1{col + 1}" if col < net.n1 else f"{names[bad[0]]}_2{col - net.n1 + 1}"
        raise DivergenceError("membership parameter became non-finite", parameter=label)
    return new, saturated


def adapt_step(
    net: T2nfsNet,
    learner: LearnerState,
    xi1: float,
    xi2: float,
    xi1_dot: float,
    xi2_dot: float,
    s: float,
    firing: FiringState,
    dt: float,
) -> AdaptResult:
    """One explicit-Euler step of every adaptation law.

    ``firing`` must come from ``network_output(net, xi1, xi2)`` on the
    pre-update network. Widths are floored at ``sigma_min`` and q is clamped
    to [0, 1]; a width or q update whose denominator is below
    ``denom_floor`` is skipped for this step.
    """
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    sg = learner.alpha * smooth_sign(s, learner.delta)
    if xi1_dot == 0.0 and xi2_dot == 0.0:
        xi_dot = 0.0
    else:
        xi_dot = net.input_vector(xi1_dot, xi2_dot)
    params, saturated = _adapt_memberships(net, net.input_vector(xi1, xi2), xi_dot, sg, dt, learner)

    wl, wu = firing.wt_lower, firing.wt_upper
    q = net.q
    v = q * wl + (1.0 - q) * wu
    f_new = net.f - (dt * sg / float(v @ v)) * v

    q_new = q
    if sg != 0.0:
        den = float(net.f @ (wl - wu))
        if abs(den) >= learner.denom_floor:
            q_new = q - dt * sg / den
            if q_new < 0.0 or q_new > 1.0:
                q_new = min(1.0, max(0.0, q_new))
                saturated = True
        else:
            saturated = True

    alpha = learner.alpha
    if abs(s) >= learner.epsilon_deadzone:
        alpha = alpha + dt * learner.gamma_alpha * abs(s)

    if not math.isfinite(f_new.sum()):
        raise DivergenceError("rule consequent became non-finite", parameter="f")
    if not math.isfinite(q_new):
        raise DivergenceError("weighting q became non-finite", parameter="q")
    if not math.isfinite(alpha):
        raise DivergenceError("learning rate became non-finite", parameter="alpha")

    new_net = T2nfsNet.trusted(params, net.n1, f_new, q_new, net.type1)
    new_learner = learner if alpha == learner.alpha else replace(learner, alpha=alpha)
    return AdaptResult(new_net, new_learner, saturated)


def track_inputs(net: T2nfsNet, dxi1: float, dxi2: float) -> T2nfsNet:
    """Translate every center by the input increments (the xi' part of the center law)."""

    p = net.params.copy()
    p[:2, : net.n1] += dxi1
    p[:2, net.n1 :] += dxi2
    return T2nfsNet.trusted(p, net.n1, net.f, net.q, net.type1)


def taun_rate_residual(
    net_before: T2nfsNet,
    net_after: T2nfsNet,
    xi1: float,
    xi2: float,
    alpha: float,
    s: float,
    delta: float,
    dt: float,
    xi1_dot: float = 0.0,
    xi2_dot: float = 0.0,
) -> float:
    """Finite-difference residual of tau_n' = -2 alpha sgn(s) across one adaptation step.

    The post-step network is evaluated at the advanced inputs
    (xi + xi' dt); with the default zero rates that is the frozen-input check.
    """
    before, _ = network_output(net_before, xi1, xi2)
    after, _ = network_output(net_after, xi1 + xi1_dot * dt, xi2 + xi2_dot * dt)
    return (after - before) / dt + 2.0 * alpha * smooth_sign(s, delta)
