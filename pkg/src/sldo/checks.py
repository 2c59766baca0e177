"""Invariant suite behind ``sldo check``.

Every check returns a ``CheckResult``; ``run_checks`` executes them in a fixed
order. The learner passed in is used for every adaptation the checks perform,
which is how tests inject faults (for example ``clamp_sigma=False``).
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from sldo.bndo import bndo_error_constant
from sldo.control import ControllerGains, flc_traditional, flc_with_observer, homogeneous_error
from sldo.fuzzy import T2nfsNet, init_network, network_output
from sldo.learning import LearnerState, adapt_step, smooth_sign, taun_rate_residual
from sldo.plant import DUFFING, constant_schedule
from sldo.sim import ExperimentConfig, ObserverConfig, RunResult, main_config, run_experiment

NORM_TOL = 1e-12
RESIDUAL_RTOL = 0.05
RESIDUAL_PROBE_DT = 1e-6
MIN_OFFSET = 0.25
N_PROBES = 200


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


# -- probe states -----------------------------------------------------------------


class Probe(NamedTuple):
    net: T2nfsNet
    learner: LearnerState
    xi1: float
    xi2: float
    s: float


def probe_states(n: int = N_PROBES, seed: int = 0, learner: Optional[LearnerState] = None, min_offset: float = 0.0):
    """Deterministic mid-adaptation states: jittered grid, random consequents, q, alpha, inputs and s.

    With ``min_offset > 0`` states where any input lies closer than that to a
    center are redrawn, which keeps the width law away from its singularity.
    """
    rng = np.random.default_rng(seed)
    base = init_network()
    learner = learner or LearnerState()
    out = []
    while len(out) < n:
        p = base.params.copy()
        p[:2] += rng.uniform(-1.0, 1.0, p[:2].shape)
        p[2:] *= rng.uniform(0.6, 1.4, p[2:].shape)
        f = rng.normal(0.0, 2.0, base.f.size)
        net = T2nfsNet.trusted(p, base.n1, f, float(rng.uniform(0.2, 0.8)))
        xi1, xi2 = (float(v) for v in rng.uniform(-4.0, 4.0, 2))
        s = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 3.0))
        alpha = float(rng.uniform(0.05, 2.0))
        if min_offset > 0 and np.abs(net.input_vector(xi1, xi2) - p[:2]).min() < min_offset:
            continue
        out.append(Probe(net, replace(learner, alpha=alpha), xi1, xi2, s))
    return out


# -- individual checks -----------------------------------------------------------


def check_normalization(run: RunResult, probes) -> CheckResult:
    worst = run.summary.norm_dev_max
    for pr in probes:
        _, fs = network_output(pr.net, pr.xi1, pr.xi2)
        worst = max(worst, abs(fs.wt_lower.sum() - 1.0), abs(fs.wt_upper.sum() - 1.0))
    return CheckResult("normalization", worst <= NORM_TOL, f"max |sum(wt) - 1| = {worst:.3g} (tol {NORM_TOL:g})")


def identity_residuals(probes, h: float = RESIDUAL_PROBE_DT):
    """Relative residual of tau_n' = -2 alpha sgn(s) at every guard-free probe."""
    rel = []
    for pr in probes:
        _, fs = network_output(pr.net, pr.xi1, pr.xi2)
        res = adapt_step(pr.net, pr.learner, pr.xi1, pr.xi2, 0.0, 0.0, pr.s, fs, h)
        if res.saturated:
            continue
        r = taun_rate_residual(pr.net, res.net, pr.xi1, pr.xi2, pr.learner.alpha, pr.s, pr.learner.delta, h)
        ref = 2.0 * pr.learner.alpha * abs(smooth_sign(pr.s, pr.learner.delta))
        rel.append(abs(r) / ref)
    return np.array(rel)


def check_adaptation_identity(learner: LearnerState, seed: int = 0) -> CheckResult:
    probes = probe_states(N_PROBES, seed, learner, min_offset=MIN_OFFSET)
    rel = identity_residuals(probes)
    ok = rel.size >= 100 and bool(np.all(rel <= RESIDUAL_RTOL))
    worst = float(rel.max()) if rel.size else math.nan
    return CheckResult(
        "adaptation_identity",
        ok,
        f"{rel.size} guard-free probes, max relative residual {worst:.3g} (tol {RESIDUAL_RTOL:g}, h={RESIDUAL_PROBE_DT:g})",
    )


def _membership_ok(net: T2nfsNet, learner: LearnerState) -> bool:
    p = net.params
    return bool(np.all(np.isfinite(p)) and p[2:].min() >= learner.sigma_min and 0.0 <= net.q <= 1.0)


def check_membership_validity(run: RunResult, run_ok: bool, learner: LearnerState, seed: int = 0) -> CheckResult:
    """Widths stay at or above sigma_min and q in [0, 1]: over the run and after one step from each probe."""
    bad = 0
    probes = probe_states(N_PROBES, seed + 1, learner)
    for pr in probes:
        _, fs = network_output(pr.net, pr.xi1, pr.xi2)
        res = adapt_step(pr.net, pr.learner, pr.xi1, pr.xi2, 0.0, 0.0, pr.s, fs, 1e-3)
        bad += not _membership_ok(res.net, learner)
    ok = run_ok and bad == 0 and run.summary.status == "completed"
    return CheckResult(
        "membership_validity",
        ok,
        f"run {'valid' if run_ok else 'INVALID'} ({run.summary.status}); {bad}/{len(probes)} probe steps invalid",
    )


def check_alpha_monotone(run: RunResult, learner: LearnerState) -> CheckResult:
    alpha = run.trace["alpha"]
    s = run.trace["s"]
    d_alpha = np.diff(alpha)
    decreasing = int(np.sum(d_alpha < 0))
    # the row-k alpha is the one produced by the step that saw row k's s
    dead = np.abs(s[1:]) < learner.epsilon_deadzone
    moved_in_deadzone = int(np.sum(d_alpha[dead] != 0.0))
    ok = decreasing == 0 and moved_in_deadzone == 0
    return CheckResult(
        "alpha_monotone", ok, f"{decreasing} decreasing steps, {moved_in_deadzone} changes inside the dead-zone"
    )


def check_bndo_oracle(dt: float = 1e-4, t_final: float = 5.0) -> CheckResult:
    cfg = main_config("bndo-flc", dt=dt, t_final=t_final, schedule=constant_schedule(3.0, t_final))
    run = run_experiment(cfg)
    t = run.trace["t"]
    want = np.array([bndo_error_constant(3.0, 3.0, tk) for tk in t])
    err = float(np.max(np.abs(run.trace["e_d"] - want)))
    return CheckResult("bndo_oracle", err < 1e-3, f"max |e_d - 3 exp(-3t)| = {err:.3g} (tol 1e-3)")


def check_flc_reductions() -> CheckResult:
    gains = ControllerGains()
    grid = np.linspace(-2.0, 2.0, 9)
    worst_zero = worst_cancel = 0.0
    for x1 in grid:
        for x2 in grid:
            x = (float(x1), float(x2))
            u0 = flc_traditional(x, 0.3, gains, DUFFING)
            worst_zero = max(worst_zero, abs(flc_with_observer(x, 0.3, gains, DUFFING, 0.0) - u0))
            # exact estimate: closed loop reduces to x2' = -k1 x1 - k2 x2
            u = flc_with_observer(x, 0.3, gains, DUFFING, 1.7)
            x2dot = DUFFING.dynamics(x, u, 1.7, 0.3)[1]
            worst_cancel = max(worst_cancel, abs(x2dot - (-gains.k1 * x[0] - gains.k2 * x[1])))

    # observer-compensated loop with d = 0 matches the traditional loop
    base = main_config(t_final=10.0, schedule=constant_schedule(0.0, 10.0))
    a = run_experiment(base)
    b = run_experiment(replace(base, controller="traditional"))
    nominal = float(np.max(np.abs(a.trace.data[:, 1:3] - b.trace.data[:, 1:3])))

    # frozen network, l_d = l_r = 0 collapses onto the BNDO loop
    frozen = ObserverConfig(l_d=(0.0, 0.0), l_r=(0.0, 0.0), freeze_network=True, strict_gains=False)
    c = run_experiment(main_config(t_final=30.0, observer=frozen))
    d = run_experiment(main_config("bndo-flc", t_final=30.0))
    collapse = float(np.max(np.abs(c.trace.data[:, 1:3] - d.trace.data[:, 1:3])))

    # analytic homogeneous error under exact cancellation
    t = 0.5
    e = homogeneous_error(1.0, 0.0, gains.k1, gains.k2, t)
    ok = worst_zero == 0.0 and worst_cancel < 1e-9 and nominal < 1e-6 and collapse < 10 * base.dt and math.isfinite(e)
    return CheckResult(
        "flc_reductions",
        ok,
        f"d_hat=0 gap {worst_zero:.3g}; cancellation gap {worst_cancel:.3g}; "
        f"nominal gap {nominal:.3g}; frozen-SLDO vs BNDO gap {collapse:.3g}",
    )


# -- driver ------------------------------------------------------------------------


def _tracked_run(cfg: ExperimentConfig):
    """Main-scenario run that also verifies every adapted network as it goes."""
    state = {"ok": True}

    def hook(k, before, after, diag):
        if state["ok"] and not _membership_ok(after.net, cfg.learner):
            state["ok"] = False

    run = run_experiment(cfg, hook=hook)
    return run, state["ok"]


def run_checks(
    learner: Optional[LearnerState] = None,
    t_final: float = 30.0,
    seed: int = 0,
    progress: Optional[Callable[[CheckResult], None]] = None,
) -> List[CheckResult]:
    learner = learner or LearnerState()
    cfg = main_config(t_final=t_final, learner=learner)
    run, run_ok = _tracked_run(cfg)
    probes = probe_states(N_PROBES, seed, learner)
    steps = [
        lambda: check_normalization(run, probes),
        lambda: check_adaptation_identity(learner, seed),
        lambda: check_membership_validity(run, run_ok, learner, seed),
        lambda: check_alpha_monotone(run, learner),
        check_bndo_oracle,
        check_flc_reductions,
    ]
    results = []
    for step in steps:
        res = step()
        results.append(res)
        if progress is not None:
            progress(res)
    return results
