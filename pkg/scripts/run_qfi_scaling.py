#!/usr/bin/env python3
"""QFI dynamics and ansatz-parameter scalings over N (two drive strengths).

Produces data/scan_w{4,8}/ with per-N trajectories, scaling.csv and
scaling_fits.json, then renders the dynamics overlay and the four scaling
panels into figures/.  Use --quick for a cheap smoke run.
"""

import argparse
import json
import subprocess
import tempfile
from pathlib import Path


def run(cmd):
    print("+", " ".join(cmd))
    subprocess.run(cmd, check=True)


def btc_sense(config: dict):
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config, fh)
    run(["btc-sense", "--config", fh.name])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="small N grid, coarse output")
    ap.add_argument("--data-dir", default="data")
    ap.add_argument("--fig-dir", default="figures")
    args = ap.parse_args()

    n_grid = [6, 8, 12, 16] if args.quick else [16, 32, 64, 128]
    n_out = 600 if args.quick else 2000
    data = Path(args.data_dir)
    figs = Path(args.fig_dir)
    figs.mkdir(parents=True, exist_ok=True)

    for omega0 in (4.0, 8.0):
        out = data / f"scan_w{omega0:g}"
        btc_sense({
            "mode": "scan-n",
            "params": {"omega0": omega0, "n_spins": n_grid[0],
                       "t_max_factor": 1.2, "n_out": n_out},
            "n_grid": n_grid,
            "output_dir": str(out),
        })
        trajectories = [str(out / f"trajectory_N{n}.csv") for n in n_grid]
        btc_sense({
            "mode": "fit",
            "params": {"omega0": omega0, "n_spins": n_grid[0]},
            "fit_inputs": trajectories,
            "output_dir": str(out),
        })
        run(["btc-plots", "dynamics", "--in", *trajectories,
             "--fits", str(out / "ansatz_fit.json"),
             "--out", str(figs / f"qfi_dynamics_w{omega0:g}.png")])
        run(["btc-plots", "scaling", "--in", str(out / "scaling.csv"),
             "--fits", str(out / "scaling_fits.json"),
             "--out", str(figs / f"qfi_scaling_w{omega0:g}.png")])
        run(["btc-plots", "observables", "--in", *trajectories,
             "--out", str(figs / f"observables_w{omega0:g}.png")])


if __name__ == "__main__":
    main()
