#!/usr/bin/env python3
"""Exact per-spin QFI against the factorized mean-field prediction."""

import argparse
import json
import subprocess
import tempfile
from pathlib import Path


def run(cmd):
    print("+", " ".join(cmd))
    subprocess.run(cmd, check=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--data-dir", default="data")
    ap.add_argument("--fig-dir", default="figures")
    args = ap.parse_args()

    n_grid = [8, 16] if args.quick else [16, 32, 64]
    out = Path(args.data_dir) / "mf_compare"
    figs = Path(args.fig_dir)
    figs.mkdir(parents=True, exist_ok=True)

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump({
            "mode": "compare-mf",
            "params": {"omega0": 4.0, "n_spins": max(n_grid),
                       "t_max": 10.0 if args.quick else 45.0,
                       "n_out": 500 if args.quick else 2250},
            "n_grid": n_grid,
            "mf_dg": 0.01,
            "output_dir": str(out),
        }, fh)
    run(["btc-sense", "--config", fh.name])
    run(["btc-plots", "mf-compare", "--in", str(out / "mf_compare.csv"),
         "--log-y", "--out", str(figs / "mf_comparison.png")])


if __name__ == "__main__":
    main()
