"""Print the type-1 vs type-2 disturbance-MSE table over noise seeds.

Usage: python scripts/noise_table.py [--seeds N] [--jobs J] [--csv FILE]
"""

import argparse
import csv

from sldo.cli import SWEEP_SNRS, noise_sweep, summarize_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    rows = noise_sweep(args.seeds, SWEEP_SNRS, jobs=args.jobs)
    table = summarize_sweep(rows)
    print(f"{'SNR dB':>6} {'T1NFS':>10} {'T2NFS':>10} {'T2<T1':>6} {'diverged':>9}")
    for e in table:
        better = e["t2nfs_mse_mean"] < e["t1nfs_mse_mean"]
        print(
            f"{e['snr_db']:>6g} {e['t1nfs_mse_mean']:>10.5g} {e['t2nfs_mse_mean']:>10.5g} {str(better):>6} "
            f"{e['t1nfs_diverged']:>4}/{e['t2nfs_diverged']:<4}"
        )
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(table[0]))
            writer.writeheader()
            writer.writerows(table)


if __name__ == "__main__":
    main()
