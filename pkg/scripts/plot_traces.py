"""Plot benchmark traces written by ``sldo benchmark --out DIR``.

Usage: python scripts/plot_traces.py DIR [--save FILE]
Requires the ``plot`` extra (matplotlib).
"""

import argparse
from pathlib import Path

import matplotlib.pyplot as plt

from sldo.io import read_trace_csv
from sldo.sim import CONTROLLERS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory", type=Path)
    ap.add_argument("--save", type=Path, default=None)
    args = ap.parse_args()

    traces = {c: read_trace_csv(args.directory / f"trace_{c}.csv") for c in CONTROLLERS}
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 9))
    for name, tr in traces.items():
        axes[0].plot(tr["t"], tr["x1"], label=name)
    axes[0].set_ylabel("x1")
    axes[0].legend()

    ref = traces["sldo-flc"]
    axes[1].plot(ref["t"], ref["d_true_clean"], "k", lw=1, label="d")
    for name in ("bndo-flc", "sldo-flc"):
        axes[1].plot(traces[name]["t"], traces[name]["d_hat"], label=f"d_hat {name}")
    axes[1].set_ylabel("disturbance")
    axes[1].legend()

    axes[2].plot(ref["t"], ref["tau_c"], label="tau_c")
    axes[2].plot(ref["t"], ref["tau_n"], label="tau_n")
    axes[2].set_ylabel("SLDO terms")
    axes[2].set_xlabel("t [s]")
    axes[2].legend()
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
