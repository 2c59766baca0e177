"""Self-learning disturbance observer (SLDO).

The estimate integrates

    d_hat_sl' = tau_c + tau_r - tau_n
    tau_c = xi1 + (l_d.z / l_p.z) xi2        (conventional law, also the sliding surface s)
    tau_r = (l_r.z / l_p.z) xi1              (robust term)
    tau_n = network output                   (learns to take over)

where xi1, xi2 are the first and second time derivatives of the embedded
BNDO estimate, obtained by backward differences.

The embedded BNDO is driven by d_hat_sl in its feedback term, so that
xi1 = (l_p.z)(d - d_hat_sl). That coupling is what makes the sliding surface
depend on the network output; with an independent BNDO in series the
integrated estimate cannot converge (it settles near (1 + l_r.z/l_p.z) d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from sldo.bndo import BndoState, bndo_init, bndo_step
from sldo.errors import DegenerateFiringError, DivergenceError, GainSignError, InvalidArgumentError
from sldo.fuzzy import T2nfsNet, network_output
from sldo.learning import LearnerState, adapt_step, track_inputs
from sldo.plant import PlantModel


def _dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1]


def _vec(v) -> tuple:
    return (float(v[0]), float(v[1]))


def matched_robust_gain(l_p, l_d, z=(0.0, 1.0)) -> tuple:
    """Robust gain l_r = l_p / (l_d . z) that cancels the e_d' cross term."""
    ldz = _dot(l_d, z)
    if not ldz > 0:
        raise GainSignError(f"l_d . z must be positive, got {ldz}")
    return (l_p[0] / ldz, l_p[1] / ldz)


@dataclass(frozen=True)
class SldoGains:
    l_p: tuple = (0.0, 3.0)
    l_d: tuple = (0.0, 1.2)
    l_r: tuple = (0.0, 2.5)

    def __post_init__(self):
        for name in ("l_p", "l_d", "l_r"):
            object.__setattr__(self, name, _vec(getattr(self, name)))

    @classmethod
    def with_matched_robust(cls, l_p, l_d, z=(0.0, 1.0)) -> "SldoGains":
        return cls(l_p, l_d, matched_robust_gain(l_p, l_d, z))

    def validate(self, z=(0.0, 1.0), strict: bool = True, rtol: float = 1e-9) -> None:
        """Check gain signs and the robust-gain relation.

        ``strict=False`` admits l_d.z = 0 and l_r.z = 0, which the reduction
        checks use to collapse the observer back onto the BNDO.
        """
        lpz, ldz, lrz = _dot(self.l_p, z), _dot(self.l_d, z), _dot(self.l_r, z)
        if not lpz > 0:
            raise GainSignError(f"l_p . z must be positive, got {lpz}")
        if strict:
            if not ldz > 0:
                raise GainSignError(f"l_d . z must be positive, got {ldz}")
            if not lrz > 0:
                raise GainSignError(f"l_r . z must be positive, got {lrz}")
            want = matched_robust_gain(self.l_p, self.l_d, z)
            for got, ref in zip(self.l_r, want):
                if not math.isclose(got, ref, rel_tol=rtol, abs_tol=1e-12):
                    raise GainSignError(
                        f"robust gain l_r={self.l_r} violates l_r = l_p / (l_d . z) = {want}"
                    )
        elif ldz < 0 or lrz < 0:
            raise GainSignError("l_d . z and l_r . z must be non-negative")

    def ratios(self, z) -> tuple:
        """(l_d.z / l_p.z, l_r.z / l_p.z)"""
        lpz = _dot(self.l_p, z)
        return _dot(self.l_d, z) / lpz, _dot(self.l_r, z) / lpz


def conventional_law(xi1: float, xi2: float, gains: SldoGains, z=(0.0, 1.0)) -> float:
    return xi1 + _dot(gains.l_d, z) / _dot(gains.l_p, z) * xi2


def robust_law(xi1: float, gains: SldoGains, z=(0.0, 1.0)) -> float:
    return _dot(gains.l_r, z) / _dot(gains.l_p, z) * xi1


class Derivatives(NamedTuple):
    xi1: float
    xi2: float
    xi1_dot: float
    xi2_dot: float
    warmup: bool = False


def derivative_estimates(hist, dt: float, prev=(0.0, 0.0), beta: float = 0.0) -> Derivatives:
    """Backward differences of the last three BNDO estimates (oldest first).

    Each raw difference is blended as beta * prev + (1 - beta) * raw. The rate
    of xi1 is taken as xi2 itself; the rate of xi2 is a first difference.
    """
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    if len(hist) < 3:
        return Derivatives(0.0, 0.0, 0.0, 0.0, True)
    h0, h1, h2 = hist[-3], hist[-2], hist[-1]
    raw1 = (h2 - h1) / dt
    raw2 = (h2 - 2.0 * h1 + h0) / (dt * dt)
    if beta:
        xi1 = beta * prev[0] + (1.0 - beta) * raw1
        xi2 = beta * prev[1] + (1.0 - beta) * raw2
    else:
        xi1, xi2 = raw1, raw2
    return Derivatives(xi1, xi2, xi2, (xi2 - prev[1]) / dt, False)


@dataclass(frozen=True)
class SldoState:
    bndo: BndoState
    net: T2nfsNet
    learner: LearnerState
    gains: SldoGains
    z: tuple = (0.0, 1.0)
    d_hat_sl: float = 0.0
    hist: tuple = ()
    xi1: float = 0.0
    xi2: float = 0.0
    xi1_dot: float = 0.0
    xi2_dot: float = 0.0
    smoothing_beta: float = 0.5
    coupled: bool = True
    freeze_network: bool = False

    @property
    def d_hat(self) -> float:
        return self.d_hat_sl


class SldoDiagnostics(NamedTuple):
    tau_c: float
    tau_r: float
    tau_n: float
    s: float
    alpha: float
    q: float
    # max |sum(wt) - 1| over the lower and upper normalized firing vectors
    norm_dev: float = 0.0
    saturated: bool = False
    warmup: bool = False


def sldo_init(
    x0,
    gains: SldoGains,
    net: T2nfsNet,
    learner: LearnerState,
    z=(0.0, 1.0),
    smoothing_beta: float = 0.5,
    coupled: bool = True,
    freeze_network: bool = False,
    strict_gains: bool = True,
) -> SldoState:
    gains.validate(z, strict=strict_gains)
    if not 0.0 <= smoothing_beta < 1.0:
        raise InvalidArgumentError(f"smoothing_beta must lie in [0, 1), got {smoothing_beta}")
    bn = bndo_init(x0, gains.l_p, z)
    return SldoState(
        bndo=bn,
        net=net,
        learner=learner,
        gains=gains,
        z=_vec(z),
        hist=(bn.d_hat,),
        smoothing_beta=smoothing_beta,
        coupled=coupled,
        freeze_network=freeze_network,
    )


def sldo_step(
    state: SldoState,
    x,
    u: float,
    plant: PlantModel,
    dt: float,
    t: float = 0.0,
    x_next=None,
    step: Optional[int] = None,
):
    """Advance the observer one sample; returns (state, SldoDiagnostics).

    Order: BNDO step, derivative estimates, s = tau_c, center tracking of the
    input increments, forward pass, adaptation, integration of the estimate.
    """
    feedback = state.d_hat_sl if state.coupled else None
    bn = bndo_step(state.bndo, x, u, plant, dt, t=t, x_next=x_next, feedback=feedback, step=step)
    hist = (state.hist + (bn.d_hat,))[-3:]
    learner = state.learner
    net = state.net
    if len(hist) < 3:
        diag = SldoDiagnostics(0.0, 0.0, 0.0, 0.0, learner.alpha, net.q, 0.0, False, True)
        return replace(state, bndo=bn, hist=hist), diag

    der = derivative_estimates(hist, dt, (state.xi1, state.xi2), state.smoothing_beta)
    xi1, xi2 = der.xi1, der.xi2
    z = state.z
    tau_c = conventional_law(xi1, xi2, state.gains, z)
    tau_r = robust_law(xi1, state.gains, z)
    s = tau_c

    norm_dev = 0.0
    saturated = False
    if state.freeze_network:
        tau_n = 0.0
    else:
        # The xi' part of the center law is applied before the forward pass so
        # that centers and inputs move together within the sample.
        net = track_inputs(net, der.xi1_dot * dt, der.xi2_dot * dt)
        try:
            tau_n, firing = network_output(net, xi1, xi2)
            norm_dev = max(abs(firing.wt_lower.sum() - 1.0), abs(firing.wt_upper.sum() - 1.0))
            net, learner, saturated = adapt_step(net, learner, xi1, xi2, 0.0, 0.0, s, firing, dt)
        except DivergenceError as exc:
            raise exc.at_step(step) if step is not None else exc
        except DegenerateFiringError as exc:
            raise DivergenceError(str(exc), step=step, parameter="firing") from exc

    d_hat_sl = state.d_hat_sl + (tau_c + tau_r - tau_n) * dt
    if not math.isfinite(d_hat_sl):
        raise DivergenceError("SLDO estimate became non-finite", step=step, parameter="d_hat_sl")

    new_state = SldoState(
        bn, net, learner, state.gains, z, d_hat_sl, hist, xi1, xi2, der.xi1_dot, der.xi2_dot,
        state.smoothing_beta, state.coupled, state.freeze_network,
    )  # fmt: skip
    diag = SldoDiagnostics(tau_c, tau_r, tau_n, s, learner.alpha, net.q, norm_dev, saturated, False)
    return new_state, diag
