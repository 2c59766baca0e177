"""Fixed-step closed-loop simulation, metrics and scenario presets.

Execution order within step k (t = k dt):
    1. sample the disturbance (clean, plus noise if configured)
    2. u_k from x_k and the estimate produced in step k-1
    3. record row k
    4. forward-Euler plant step to x_{k+1}
    5. advance the observer with (x_k, u_k, x_{k+1}) to get the estimate for k+1
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from sldo.bndo import bndo_init, bndo_step
from sldo.control import ControllerGains, flc_traditional, flc_with_observer
from sldo.errors import DivergenceError, InvalidArgumentError
from sldo.fuzzy import downgrade_to_type1, init_network
from sldo.learning import LearnerState
from sldo.observer import SldoGains, sldo_init, sldo_step, matched_robust_gain
from sldo.plant import DUFFING, DisturbanceSchedule, NoiseSpec, PlantModel, apply_noise, main_schedule

CONTROLLERS = ("traditional", "bndo-flc", "sldo-flc")

COLUMNS = (
    "t", "x1", "x2", "u", "d_true_clean", "d_applied", "d_hat", "e_d",
    "tau_c", "tau_r", "tau_n", "s", "alpha", "q",
)  # fmt: skip

PLANTS = {"duffing": DUFFING}


@dataclass
class ObserverConfig:
    l_p: tuple = (0.0, 3.0)
    l_d: tuple = (0.0, 1.2)
    # None -> l_p / (l_d . z)
    l_r: Optional[tuple] = None
    smoothing_beta: float = 0.5
    coupled: bool = True
    freeze_network: bool = False
    strict_gains: bool = True

    def gains(self, z) -> SldoGains:
        l_r = self.l_r if self.l_r is not None else matched_robust_gain(self.l_p, self.l_d, z)
        return SldoGains(self.l_p, self.l_d, l_r)


@dataclass
class NetworkConfig:
    network_type: int = 2
    I: int = 3
    J: int = 3
    range1: tuple = (-5.0, 5.0)
    range2: tuple = (-5.0, 5.0)
    sigma_ratio: float = 1.2
    q0: float = 0.5

    def build(self):
        net = init_network(self.I, self.J, self.range1, self.range2, self.sigma_ratio, self.q0)
        return downgrade_to_type1(net) if self.network_type == 1 else net


@dataclass
class ExperimentConfig:
    dt: float = 0.001
    t_final: float = 30.0
    x0: tuple = (1.0, -1.0)
    controller: str = "sldo-flc"
    k1: float = 50.0
    k2: float = 25.0
    observer: ObserverConfig = field(default_factory=ObserverConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    learner: LearnerState = field(default_factory=LearnerState)
    schedule: DisturbanceSchedule = field(default_factory=main_schedule)
    snr_db: float = math.inf
    seed: int = 0
    plant: str = "duffing"

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.snr_db, self.seed)

    def plant_model(self) -> PlantModel:
        return PLANTS[self.plant]

    def validate(self) -> None:
        if not self.dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= 0:
            raise InvalidArgumentError(f"t_final must be non-negative, got {self.t_final}")
        if self.controller not in CONTROLLERS:
            raise InvalidArgumentError(f"controller must be one of {CONTROLLERS}, got {self.controller!r}")
        if self.plant not in PLANTS:
            raise InvalidArgumentError(f"unknown plant {self.plant!r}")
        if self.network.network_type not in (1, 2):
            raise InvalidArgumentError("network_type must be 1 or 2")
        ControllerGains(self.k1, self.k2)
        if self.t_final > self.schedule.t_final + 1e-12:
            raise InvalidArgumentError(
                f"disturbance schedule ends at {self.schedule.t_final}, before t_final={self.t_final}"
            )
        z = self.plant_model().z
        self.observer.gains(z).validate(z, strict=self.observer.strict_gains)
        self.network.build()
        self.noise


class TraceRecord(NamedTuple):
    t: float
    x1: float
    x2: float
    u: float
    d_true_clean: float
    d_applied: float
    d_hat: float
    e_d: float
    tau_c: float
    tau_r: float
    tau_n: float
    s: float
    alpha: float
    q: float


@dataclass
class Trace:
    data: np.ndarray

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    def row(self, k: int) -> TraceRecord:
        return TraceRecord(*self.data[k].tolist())

    def window(self, t0: float, t1: float = math.inf) -> np.ndarray:
        t = self["t"]
        return (t >= t0 - 1e-9) & (t < t1 - 1e-9)


@dataclass
class RunSummary:
    mse_disturbance: float = 0.0
    mse_disturbance_from_1s: float = 0.0
    mse_state: float = 0.0
    final_alpha: float = 0.0
    wall_time_ms_median: Optional[float] = None
    wall_time_ms_mean: Optional[float] = None
    total_wall_time_s: float = 0.0
    steps: int = 0
    status: str = "completed"
    message: str = ""
    norm_dev_max: float = 0.0
    saturated_steps: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RunResult:
    config: ExperimentConfig
    trace: Trace
    summary: RunSummary
    step_times: np.ndarray
    final_state: object = None


def euler_step(x, deriv, dt: float) -> np.ndarray:
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    return np.asarray(x, dtype=float) + dt * np.asarray(deriv, dtype=float)


def mse(a, b, from_t: float = 0.0, t=None, dt: Optional[float] = None) -> float:
    """Mean squared difference over samples with t >= from_t.

    Supply either the time stamps ``t`` or a uniform step ``dt``; with
    neither, ``from_t`` must be 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"length mismatch: {a.shape} vs {b.shape}")
    if t is None:
        if dt is not None:
            t = np.arange(a.size) * dt
        elif from_t != 0.0:
            raise InvalidArgumentError("from_t needs time stamps or dt")
        else:
            t = np.zeros(a.size)
    mask = np.asarray(t) >= from_t - 1e-9
    if not mask.any():
        raise InvalidArgumentError(f"empty MSE window (from_t={from_t})")
    diff = a[mask] - b[mask]
    return float(np.mean(diff * diff))


def timing_probe(run: RunResult) -> dict:
    times = run.step_times
    if times.size == 0:
        return {"empty": True}
    ms = times * 1e3
    return {
        "empty": False,
        "steps": int(times.size),
        "median_ms": float(np.median(ms)),
        "mean_ms": float(np.mean(ms)),
        "total_s": float(times.sum()),
    }


ObserverHook = Callable[[int, object, object, object], None]


def run_experiment(config: ExperimentConfig, hook: Optional[ObserverHook] = None) -> RunResult:
    """Run one closed-loop simulation.

    ``hook(step, state_before, state_after, diagnostics)`` is called after each
    SLDO update (sldo-flc only). Divergence ends the run early with a partial
    trace and ``status = "diverged"``.
    """
    config.validate()
    plant = config.plant_model()
    z1, z2 = plant.z
    dt = config.dt
    n = config.n_steps
    gains_c = ControllerGains(config.k1, config.k2)
    data = np.zeros((n, len(COLUMNS)))
    step_times = np.zeros(n)
    summary = RunSummary()
    if n == 0:
        return RunResult(config, Trace(data), summary, step_times)

    times = np.arange(n) * dt
    clean = np.array([config.schedule(tk) for tk in times])
    applied = apply_noise(clean, config.noise) if config.noise.enabled else clean

    x1, x2 = float(config.x0[0]), float(config.x0[1])
    mode = config.controller
    obs = None
    if mode == "bndo-flc":
        obs = bndo_init((x1, x2), config.observer.l_p, plant.z)
    elif mode == "sldo-flc":
        oc = config.observer
        obs = sldo_init(
            (x1, x2),
            oc.gains(plant.z),
            config.network.build(),
            config.learner,
            z=plant.z,
            smoothing_beta=oc.smoothing_beta,
            coupled=oc.coupled,
            freeze_network=oc.freeze_network,
            strict_gains=oc.strict_gains,
        )
    d_hat = 0.0
    diag_row = (0.0, 0.0, 0.0, 0.0)
    alpha = config.learner.alpha if mode == "sldo-flc" else 0.0
    q = config.network.q0 if mode == "sldo-flc" else 0.0
    norm_dev_max = 0.0
    saturated_steps = 0
    perf = time.perf_counter
    rows = n
    t_list, clean_list, applied_list = times.tolist(), clean.tolist(), applied.tolist()
    # overflow surfaces through the finiteness checks as a DivergenceError
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            for k in range(n):
                t0 = perf()
                t = t_list[k]
                d_c = clean_list[k]
                d_a = applied_list[k]
                x = (x1, x2)
                if mode == "traditional":
                    u = flc_traditional(x, t, gains_c, plant)
                else:
                    u = flc_with_observer(x, t, gains_c, plant, d_hat)
                data[k] = (t, x1, x2, u, d_c, d_a, d_hat, d_c - d_hat, *diag_row, alpha, q)

                dx1 = x2 + z1 * d_a
                dx2 = plant.a(x, t) + plant.b(x) * u + z2 * d_a
                nx1, nx2 = x1 + dt * dx1, x2 + dt * dx2
                if not (math.isfinite(nx1) and math.isfinite(nx2)):
                    raise DivergenceError("plant state became non-finite", step=k, parameter="x")
                xn = (nx1, nx2)
                if mode == "bndo-flc":
                    obs = bndo_step(obs, x, u, plant, dt, t=t, x_next=xn, step=k)
                    d_hat = obs.d_hat
                elif mode == "sldo-flc":
                    before = obs
                    obs, diag = sldo_step(obs, x, u, plant, dt, t=t, x_next=xn, step=k)
                    d_hat = obs.d_hat_sl
                    diag_row = (diag.tau_c, diag.tau_r, diag.tau_n, diag.s)
                    alpha, q = diag.alpha, diag.q
                    if diag.norm_dev > norm_dev_max:
                        norm_dev_max = diag.norm_dev
                    saturated_steps += diag.saturated
                    if hook is not None:
                        hook(k, before, obs, diag)
                x1, x2 = nx1, nx2
                step_times[k] = perf() - t0
        except DivergenceError as exc:
            rows = k + 1
            data = data[:rows]
            step_times = step_times[:k]
            summary.status = "diverged"
            summary.message = str(exc.at_step(k))

    trace = Trace(data)
    summary.steps = rows
    summary.mse_disturbance = mse(trace["d_true_clean"], trace["d_hat"])
    summary.mse_disturbance_from_1s = (
        mse(trace["d_true_clean"], trace["d_hat"], from_t=1.0, t=trace["t"])
        if trace["t"][-1] >= 1.0
        else summary.mse_disturbance
    )
    summary.mse_state = float(np.mean(trace["x1"] ** 2))
    summary.final_alpha = float(alpha)
    summary.norm_dev_max = float(norm_dev_max)
    summary.saturated_steps = int(saturated_steps)
    result = RunResult(config, trace, summary, step_times, obs)
    stats = timing_probe(result)
    if not stats["empty"]:
        summary.wall_time_ms_median = stats["median_ms"]
        summary.wall_time_ms_mean = stats["mean_ms"]
        summary.total_wall_time_s = stats["total_s"]
    return result


# -- scenarios ----------------------------------------------------------------


def main_config(controller: str = "sldo-flc", **overrides) -> ExperimentConfig:
    """Main scenario: x(0) = [1, -1], 30 s, step at 10 s, 3 sin(t) from 20 s."""
    return replace(ExperimentConfig(controller=controller), **overrides)


def noise_config(snr_db: float, seed: int, network_type: int = 2, **overrides) -> ExperimentConfig:
    """Noise study: x(0) = [1, 1], heavier derivative smoothing."""
    cfg = ExperimentConfig(
        controller="sldo-flc",
        x0=(1.0, 1.0),
        snr_db=snr_db,
        seed=seed,
        observer=ObserverConfig(smoothing_beta=0.9),
        network=NetworkConfig(network_type=network_type),
    )
    return replace(cfg, **overrides)


def segment_bounds(schedule: DisturbanceSchedule):
    return [(seg.t_start, seg.t_end) for seg in schedule.segments]
