"""Feedback-linearization controllers.

Traditional:   u = -b^-1 (xd'' + a(x) - k2 (xd' - x2) - k1 (xd - x1))
Compensated:   the same with z2 * d_hat added inside the bracket.

With e = xd - x1 the closed loop is e'' + k2 e' + k1 e = -z2 (d - d_hat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from sldo.errors import InvalidArgumentError, SingularInputGainError
from sldo.plant import PlantModel

B_FLOOR = 1e-9


def _zero(t: float) -> float:
    return 0.0


@dataclass(frozen=True)
class ControllerGains:
    k1: float = 50.0
    k2: float = 25.0
    x_d: Callable[[float], float] = _zero
    x_d_dot: Callable[[float], float] = _zero
    x_d_ddot: Callable[[float], float] = _zero

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0):
            raise InvalidArgumentError(f"k1, k2 must be positive, got k1={self.k1}, k2={self.k2}")


def flc_traditional(x, t: float, gains: ControllerGains, plant: PlantModel) -> float:
    b = plant.b(x)
    if not abs(b) >= B_FLOOR:
        raise SingularInputGainError(f"|b(x)| = {abs(b):g} below {B_FLOOR:g} at x={tuple(x)}")
    bracket = (
        gains.x_d_ddot(t)
        + plant.a(x, t)
        - gains.k2 * (gains.x_d_dot(t) - x[1])
        - gains.k1 * (gains.x_d(t) - x[0])
    )
    return -bracket / b


def flc_with_observer(x, t: float, gains: ControllerGains, plant: PlantModel, d_hat: float) -> float:
    """Traditional law plus disturbance feedforward -b^-1 z2 d_hat."""
    if d_hat == 0.0:
        return flc_traditional(x, t, gains, plant)
    b = plant.b(x)
    if not abs(b) >= B_FLOOR:
        raise SingularInputGainError(f"|b(x)| = {abs(b):g} below {B_FLOOR:g} at x={tuple(x)}")
    bracket = (
        gains.x_d_ddot(t)
        + plant.a(x, t)
        - gains.k2 * (gains.x_d_dot(t) - x[1])
        - gains.k1 * (gains.x_d(t) - x[0])
        + plant.z[1] * d_hat
    )
    return -bracket / b


def homogeneous_error(e0: float, e_dot0: float, k1: float, k2: float, t: float) -> float:
    """Solution of e'' + k2 e' + k1 e = 0 (overdamped, critical or underdamped)."""
    disc = k2 * k2 - 4.0 * k1
    if disc > 0:
        r = math.sqrt(disc)
        s1, s2 = (-k2 + r) / 2.0, (-k2 - r) / 2.0
        c2 = (e_dot0 - s1 * e0) / (s2 - s1)
        c1 = e0 - c2
        return c1 * math.exp(s1 * t) + c2 * math.exp(s2 * t)
    if disc == 0:
        s = -k2 / 2.0
        return (e0 + (e_dot0 - s * e0) * t) * math.exp(s * t)
    sigma, wd = -k2 / 2.0, math.sqrt(-disc) / 2.0
    return math.exp(sigma * t) * (e0 * math.cos(wd * t) + (e_dot0 - sigma * e0) / wd * math.sin(wd * t))
