#!/usr/bin/env python3
"""Asymptotic growth exponent versus dissipation strength.

For each kappa in the grid an inner N-scan is fitted and the extrapolated
exponent recorded; renders alpha_inf against kappa/omega0.
"""

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

    n_grid = [6, 8, 10, 12] if args.quick else [16, 32, 64, 128]
    kappa_grid = [2.0, 1.0] if args.quick else [2.0, 0.8, 0.4, 0.2]
    out = Path(args.data_dir) / "kappa_scan"
    figs = Path(args.fig_dir)
    figs.mkdir(parents=True, exist_ok=True)

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump({
            "mode": "scan-kappa",
            "params": {"omega0": 4.0, "n_spins": n_grid[0],
                       "t_max_factor": 1.2,
                       "n_out": 500 if args.quick else 4000},
            "n_grid": n_grid,
            "kappa_grid": kappa_grid,
            "envelope_threshold": 0.001,
            "output_dir": str(out),
        }, fh)
    run(["btc-sense", "--config", fh.name])
    run(["btc-plots", "alpha-kappa", "--in", str(out / "kappa_scan.csv"),
         "--log-x", "--out", str(figs / "alpha_vs_kappa.png")])


if __name__ == "__main__":
    main()
