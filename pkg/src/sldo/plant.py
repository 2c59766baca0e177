"""Second-order plant model, the Duffing oscillator, disturbance schedules and noise.

The plant has the form

    x1' = x2 + z1 d
    x2' = a(x, t) + b(x) u + z2 d

with a(x, t) = a_fn(x) + drive(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from sldo.errors import DegenerateSignalError, InvalidArgumentError, OutOfRangeError


@dataclass(frozen=True)
class PlantModel:
    a_fn: Callable[[np.ndarray], float]
    b_fn: Callable[[np.ndarray], float]
    z: tuple = (0.0, 1.0)
    time_varying_drive: Optional[Callable[[float], float]] = None
    name: str = "plant"

    def __post_init__(self):
        z = tuple(float(v) for v in self.z)
        if len(z) != 2:
            raise InvalidArgumentError(f"z must be a 2-vector, got {self.z!r}")
        if not any(z):
            raise InvalidArgumentError("z must have at least one nonzero entry")
        object.__setattr__(self, "z", z)

    def a(self, x, t: float) -> float:
        val = self.a_fn(x)
        if self.time_varying_drive is not None:
            val += self.time_varying_drive(t)
        return val

    def b(self, x) -> float:
        return self.b_fn(x)

    def g1(self, x, t: float) -> np.ndarray:
        return np.array([x[1], self.a(x, t)])

    def g2(self, x) -> np.ndarray:
        return np.array([0.0, self.b(x)])

    def dynamics(self, x, u: float, d: float, t: float) -> np.ndarray:
        z1, z2 = self.z
        return np.array([x[1] + z1 * d, self.a(x, t) + self.b(x) * u + z2 * d])


def _duffing_drift(x) -> float:
    x1, x2 = x[0], x[1]
    return 1.1 * x1 - 0.4 * x2 - x1 * x1 * x1


def _duffing_drive(t: float) -> float:
    return 2.1 * math.cos(1.8 * t)


def _unit_gain(x) -> float:
    return 1.0


DUFFING = PlantModel(
    a_fn=_duffing_drift,
    b_fn=_unit_gain,
    z=(0.0, 1.0),
    time_varying_drive=_duffing_drive,
    name="duffing",
)


def duffing_dynamics(x, u: float, d: float, t: float) -> np.ndarray:
    """State derivative of the forced Duffing oscillator."""
    vals = (x[0], x[1], u, d, t)
    if not all(math.isfinite(v) for v in vals):
        raise InvalidArgumentError(f"non-finite input to duffing_dynamics: {vals}")
    return DUFFING.dynamics(x, u, d, t)


# -- disturbance schedules ----------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """One piece of a schedule on [t_start, t_end).

    kind is "zero", "constant" (params: level) or "sinusoid"
    (params: amplitude, omega [rad/s], phase [rad]); sinusoids use absolute time.
    """

    t_start: float
    t_end: float
    kind: str = "zero"
    params: tuple = ()

    def __post_init__(self):
        nparams = {"zero": 0, "constant": 1, "sinusoid": 3}
        if self.kind not in nparams:
            raise InvalidArgumentError(f"unknown segment kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if self.kind == "sinusoid" and len(params) == 2:
            params = params + (0.0,)
        if len(params) != nparams[self.kind]:
            raise InvalidArgumentError(
                f"segment kind {self.kind!r} takes {nparams[self.kind]} parameters, got {len(params)}"
            )
        if not (self.t_end > self.t_start):
            raise InvalidArgumentError(f"empty segment [{self.t_start}, {self.t_end})")
        object.__setattr__(self, "params", params)

    def value(self, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.params[0]
        amp, omega, phase = self.params
        return amp * math.sin(omega * t + phase)


@dataclass(frozen=True)
class DisturbanceSchedule:
    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise InvalidArgumentError("schedule needs at least one segment")
        if segs[0].t_start != 0.0:
            raise InvalidArgumentError("schedule must start at t=0")
        for prev, nxt in zip(segs, segs[1:]):
            if nxt.t_start != prev.t_end:
                raise InvalidArgumentError(
                    f"segments not contiguous at t={prev.t_end} / t={nxt.t_start}"
                )
        object.__setattr__(self, "segments", segs)

    @property
    def t_final(self) -> float:
        return self.segments[-1].t_end

    def segment_at(self, t: float) -> Segment:
        if not (0.0 <= t <= self.t_final):
            raise OutOfRangeError(f"t={t} outside schedule coverage [0, {self.t_final}]")
        for seg in self.segments:
            if t < seg.t_end:
                return seg
        return self.segments[-1]

    def __call__(self, t: float) -> float:
        return self.segment_at(t).value(t)


def disturbance_at(schedule: DisturbanceSchedule, t: float) -> float:
    return schedule(t)


def main_schedule(t_final: float = 30.0) -> DisturbanceSchedule:
    """Zero until 10 s, a step of 3 until 20 s, then 3 sin(t)."""
    segs = [
        Segment(0.0, 10.0, "zero"),
        Segment(10.0, 20.0, "constant", (3.0,)),
        Segment(20.0, 30.0, "sinusoid", (3.0, 1.0, 0.0)),
    ]
    if t_final > 30.0:
        segs[-1] = Segment(20.0, t_final, "sinusoid", (3.0, 1.0, 0.0))
    return DisturbanceSchedule(tuple(segs))


def constant_schedule(level: float, t_final: float) -> DisturbanceSchedule:
    kind = "zero" if level == 0 else "constant"
    params = () if level == 0 else (level,)
    return DisturbanceSchedule((Segment(0.0, t_final, kind, params),))


def sinusoid_schedule(amplitude: float, omega: float, t_final: float, phase: float = 0.0):
    return DisturbanceSchedule((Segment(0.0, t_final, "sinusoid", (amplitude, omega, phase)),))


# -- noise --------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise InvalidArgumentError(f"snr_db must be finite or +inf, got {self.snr_db}")

    @property
    def enabled(self) -> bool:
        return math.isfinite(self.snr_db)


def noise_variance(clean: Sequence[float], snr_db: float) -> float:
    power = float(np.mean(np.square(np.asarray(clean, dtype=float))))
    if power == 0.0:
        raise DegenerateSignalError("clean signal has zero power; SNR is undefined")
    return power / 10.0 ** (snr_db / 10.0)


def apply_noise(clean: Sequence[float], spec: NoiseSpec) -> np.ndarray:
    """Add white Gaussian noise at ``spec.snr_db`` relative to the run's mean-square power.

    ``snr_db = inf`` disables noise and returns an unchanged copy.
    """
    arr = np.asarray(clean, dtype=float)
    if arr.size == 0:
        raise InvalidArgumentError("clean sequence is empty")
    if not spec.enabled:
        return arr.copy()
    var = noise_variance(arr, spec.snr_db)
    rng = np.random.default_rng(spec.seed)
    return arr + rng.normal(0.0, math.sqrt(var), size=arr.shape)


def empirical_snr_db(clean: Sequence[float], noisy: Sequence[float]) -> float:
    clean = np.asarray(clean, dtype=float)
    noise = np.asarray(noisy, dtype=float) - clean
    return 10.0 * math.log10(np.mean(clean**2) / np.mean(noise**2))
