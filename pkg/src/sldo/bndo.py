"""Basic nonlinear disturbance observer.

    p'    = -(l_p . z) p - l_p . (z (l_p . x) + g1(x) + g2(x) u)
    d_hat = p + l_p . x

which gives d_hat' = (l_p . z)(d - d_hat): a first-order lag of the true
disturbance, exact for constants and biased for anything time-varying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from sldo.errors import DivergenceError, GainSignError, InvalidArgumentError
from sldo.plant import PlantModel


def _dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1]


@dataclass(frozen=True)
class BndoState:
    p: float
    l_p: tuple
    d_hat: float


def check_gain(l_p, z, name: str = "l_p") -> float:
    gz = _dot(l_p, z)
    if not gz > 0:
        raise GainSignError(f"{name} . z must be positive, got {gz}")
    return gz


def bndo_init(x0, l_p, z=(0.0, 1.0)) -> BndoState:
    """Start with p = -l_p . x0 so the first estimate is exactly zero."""
    check_gain(l_p, z)
    l_p = (float(l_p[0]), float(l_p[1]))
    p = -_dot(l_p, x0)
    return BndoState(p=p, l_p=l_p, d_hat=p + _dot(l_p, x0))


def bndo_step(
    state: BndoState,
    x,
    u: float,
    plant: PlantModel,
    dt: float,
    t: float = 0.0,
    x_next=None,
    feedback: Optional[float] = None,
    step: Optional[int] = None,
) -> BndoState:
    """Advance p by one forward-Euler step.

    The derivative is evaluated at the pre-step state ``x``; the new estimate is
    formed with ``x_next`` (the post-step plant state). Using the same ``x`` and
    ``u`` that drove the plant step makes d_hat' = (l_p . z)(d - d_hat) hold
    exactly in discrete time.

    ``feedback`` replaces the observer's own estimate in the p dynamics. The
    self-learning observer passes its integrated estimate here, which turns
    the rate of this estimate into (l_p . z) times the self-learning error.
    """
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    l_p = state.l_p
    z = plant.z
    lpz = _dot(l_p, z)
    x1, x2 = x[0], x[1]
    a = plant.a(x, t)
    b = plant.b(x)
    # l_p . (g1 + g2 u)
    drive = l_p[0] * x2 + l_p[1] * (a + b * u)
    if feedback is None:
        p_dot = -lpz * state.p - lpz * (l_p[0] * x1 + l_p[1] * x2) - drive
    else:
        p_dot = -lpz * feedback - drive
    p = state.p + dt * p_dot
    xn = x if x_next is None else x_next
    d_hat = p + l_p[0] * xn[0] + l_p[1] * xn[1]
    if not (math.isfinite(p) and math.isfinite(d_hat)):
        raise DivergenceError("BNDO state became non-finite", step=step, parameter="p")
    return BndoState(p=p, l_p=l_p, d_hat=d_hat)


def bndo_error_constant(e0: float, lpz: float, t: float) -> float:
    """Analytic estimation error for a constant disturbance: e0 exp(-(l_p.z) t)."""
    return e0 * math.exp(-lpz * t)


def bndo_sinusoid_bias_amplitude(amplitude: float, omega: float, lpz: float) -> float:
    """Steady-state error amplitude for d = A sin(w t): A w / sqrt(w^2 + (l_p.z)^2)."""
    return amplitude * omega / math.sqrt(omega**2 + lpz**2)
