"""Command-line front end: ``sldo run | benchmark | check``.

Exit codes: 0 ok, 1 usage (bad arguments, unreadable paths), 2 invalid
config, 3 a run diverged, 4 an invariant check failed.
Log verbosity follows ``SLDO_LOG_LEVEL`` (DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from sldo.checks import run_checks
from sldo.errors import ConfigError, SldoError
from sldo.io import default_config_path, load_config, validate_config, write_summary_json, write_trace_csv
from sldo.sim import CONTROLLERS, ExperimentConfig, noise_config, run_experiment, segment_bounds

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_CHECK_FAILED = 4

LOG_ENV = "SLDO_LOG_LEVEL"
QUICK_T_FINAL = 5.0
STEADY_WINDOW = 5.0
STEADY_THRESHOLD = 0.01
SWEEP_SNRS = (20.0, 40.0, 60.0)

OBSERVERS = {
    "bndo": ("bndo-flc", 2),
    "sldo": ("sldo-flc", 2),
    "sldo-t1": ("sldo-flc", 1),
}

log = logging.getLogger("sldo")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this front end reserves 2 for config errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from exc
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out} is not writable")
    return out


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "observer", None):
        controller, net_type = OBSERVERS[args.observer]
        cfg = replace(cfg, controller=controller, network=replace(cfg.network, network_type=net_type))
    # benchmark --seeds uses --snr for the sweep only
    if getattr(args, "snr", None) is not None and not getattr(args, "seeds", 0):
        cfg = replace(cfg, snr_db=args.snr[0])
    if getattr(args, "quick", False):
        cfg = replace(cfg, t_final=min(cfg.t_final, QUICK_T_FINAL))
    validate_config(cfg)
    return cfg


def _load(args) -> ExperimentConfig:
    path = Path(args.config) if args.config else default_config_path()
    try:
        cfg = load_config(path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    return _apply_overrides(cfg, args)


# -- run ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(args.out)
    log.info("running %s for %.3g s (%d steps)", cfg.controller, cfg.t_final, cfg.n_steps)
    result = run_experiment(cfg)
    write_trace_csv(result.trace, out / "trace.csv")
    write_summary_json(result.summary, out / "summary.json", extra={"controller": cfg.controller})
    s = result.summary
    print(f"{s.status}: {s.steps} steps, disturbance MSE {s.mse_disturbance:.6g}, files in {out}")
    if s.status != "completed":
        print(s.message, file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


# -- benchmark -------------------------------------------------------------------


def steady_state_table(result, t_final: float) -> List[dict]:
    """max |x1| over the last STEADY_WINDOW seconds of every segment inside the run."""
    rows = []
    tr = result.trace
    for i, (t0, t1) in enumerate(segment_bounds(result.config.schedule), start=1):
        t1 = min(t1, t_final)
        if t1 <= t0:
            break
        lo = max(t0, t1 - STEADY_WINDOW)
        mask = tr.window(lo, t1 + 1e-9)
        peak = float(np.max(np.abs(tr["x1"][mask]))) if mask.any() else math.nan
        rows.append({"segment": i, "t0": t0, "t1": t1, "max_abs_x1": peak, "offset": bool(peak > STEADY_THRESHOLD)})
    return rows


def _sweep_run(job):
    snr, seed, net_type, t_final = job
    res = run_experiment(noise_config(snr, seed, network_type=net_type, t_final=t_final))
    return snr, seed, net_type, res.summary.status, res.summary.mse_disturbance, res.summary.mse_disturbance_from_1s


def noise_sweep(seeds: int, snrs, t_final: float = 30.0, jobs: int = 1) -> List[tuple]:
    """Disturbance MSE for type-1 and type-2 networks over ``seeds`` noise realizations per SNR."""
    work = [(snr, seed, nt, t_final) for snr in snrs for nt in (1, 2) for seed in range(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_run, work))
    out = []
    for job in work:
        log.info("noise sweep snr=%s seed=%s type=%s", job[0], job[1], job[2])
        out.append(_sweep_run(job))
    return out


def summarize_sweep(rows) -> List[dict]:
    table = []
    for snr in sorted({r[0] for r in rows}):
        entry = {"snr_db": snr}
        for nt, label in ((1, "t1nfs"), (2, "t2nfs")):
            sel = [r for r in rows if r[0] == snr and r[2] == nt]
            # a diverged run's MSE covers only its partial trace, so it is left out of the mean
            done = [r for r in sel if r[3] == "completed"]
            entry[f"{label}_mse_mean"] = float(np.mean([r[4] for r in done])) if done else math.nan
            entry[f"{label}_mse_from_1s_mean"] = float(np.mean([r[5] for r in done])) if done else math.nan
            entry[f"{label}_completed"] = len(done)
            entry[f"{label}_diverged"] = len(sel) - len(done)
        table.append(entry)
    return table


def cmd_benchmark(args) -> int:
    base = _load(args)
    out = _out_dir(args.out)
    t_final = base.t_final
    report = {"t_final": t_final, "controllers": {}}
    diverged = False
    # timed runs stay serial so the per-step timing is not skewed by contention
    for controller in CONTROLLERS:
        cfg = replace(base, controller=controller)
        log.info("benchmark run %s", controller)
        res = run_experiment(cfg)
        write_trace_csv(res.trace, out / f"trace_{controller}.csv")
        s = res.summary
        diverged |= s.status != "completed"
        report["controllers"][controller] = {
            "status": s.status,
            "mse_disturbance": s.mse_disturbance if controller != "traditional" else None,
            "mse_disturbance_from_1s": s.mse_disturbance_from_1s if controller != "traditional" else None,
            "mse_state": s.mse_state,
            "median_step_ms": s.wall_time_ms_median,
            "mean_step_ms": s.wall_time_ms_mean,
            "segments": steady_state_table(res, t_final),
        }

    print(f"{'controller':<12} {'segment':>7} {'window':>13} {'max|x1|':>10}  offset")
    for controller, entry in report["controllers"].items():
        for seg in entry["segments"]:
            window = f"[{max(seg['t0'], seg['t1'] - STEADY_WINDOW):g},{seg['t1']:g}]"
            print(
                f"{controller:<12} {seg['segment']:>7} {window:>13} {seg['max_abs_x1']:>10.4g}  "
                f"{'yes' if seg['offset'] else 'no'}"
            )
    print()
    print(f"{'controller':<12} {'MSE(d)':>10} {'MSE(d) t>=1':>12} {'median ms':>10} {'mean ms':>9}")
    for controller, entry in report["controllers"].items():
        mse = entry["mse_disturbance"]
        mse1 = entry["mse_disturbance_from_1s"]
        print(
            f"{controller:<12} {'-' if mse is None else f'{mse:.5g}':>10} {'-' if mse1 is None else f'{mse1:.5g}':>12} "
            f"{entry['median_step_ms']:>10.4f} {entry['mean_step_ms']:>9.4f}"
        )

    if args.seeds:
        snrs = tuple(args.snr) if args.snr else SWEEP_SNRS
        rows = noise_sweep(args.seeds, snrs, t_final=t_final, jobs=args.jobs)
        table = summarize_sweep(rows)
        report["noise_sweep"] = {"seeds": args.seeds, "table": table}
        diverged |= any(r[3] != "completed" for r in rows)
        with (out / "noise_sweep.csv").open("w") as fh:
            fh.write("snr_db,seed,network_type,status,mse_disturbance,mse_disturbance_from_1s\n")
            for r in rows:
                fh.write(f"{r[0]:g},{r[1]},{r[2]},{r[3]},{r[4]:.17g},{r[5]:.17g}\n")
        print()
        print(f"{'SNR dB':>6} {'T1NFS MSE':>10} {'T2NFS MSE':>10} {'diverged':>9}   ({args.seeds} seeds each)")
        for e in table:
            print(
                f"{e['snr_db']:>6g} {e['t1nfs_mse_mean']:>10.5g} {e['t2nfs_mse_mean']:>10.5g} "
                f"{e['t1nfs_diverged']:>4}/{e['t2nfs_diverged']:<4}"
            )

    (out / "benchmark.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    return EXIT_DIVERGED if diverged else EXIT_OK


# -- check ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    t_final = QUICK_T_FINAL if args.quick else 30.0

    def show(res):
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}", flush=True)

    results = run_checks(t_final=t_final, progress=show)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"all {len(results)} checks passed")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sldo", description="Self-learning disturbance observer experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_default):
        p.add_argument("--config", help="INI experiment config (default: bundled main scenario)")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--quick", action="store_true", help=f"cap t_final at {QUICK_T_FINAL:g} s")
        p.add_argument("--snr", type=float, nargs="+", metavar="DB", help="noise level(s) in dB")
        p.add_argument("--observer", choices=sorted(OBSERVERS), help="observer variant to run")

    p_run = sub.add_parser("run", help="simulate one config, write trace.csv and summary.json")
    common(p_run, "out")
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("benchmark", help="three-controller comparison and optional noise sweep")
    common(p_bench, "out/benchmark")
    p_bench.add_argument("--seeds", type=int, default=0, metavar="N", help="noise sweep with N seeds per SNR")
    p_bench.add_argument("--jobs", type=int, default=1, help="worker processes for the noise sweep")
    p_bench.set_defaults(func=cmd_benchmark)

    p_check = sub.add_parser("check", help="run the invariant suite")
    p_check.add_argument("--quick", action="store_true", help=f"shorter tracked run ({QUICK_T_FINAL:g} s)")
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seeds", 0) and args.seeds < 0:
        parser.error("--seeds must be non-negative")
    if getattr(args, "snr", None) and args.command == "run" and len(args.snr) > 1:
        parser.error("run takes a single --snr value")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SldoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
