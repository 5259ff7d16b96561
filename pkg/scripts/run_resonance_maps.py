#!/usr/bin/env python3
"""Peak-QFI heatmaps over AC detuning (frequency and phase), two sizes.

Writes data/heatmap_N{64,128}/heatmap.csv and a side-by-side figure.  The
grids are centered on the resonance; --quick shrinks everything.
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
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--n-workers", type=int, default=1)
    ap.add_argument("--data-dir", default="data")
    ap.add_argument("--fig-dir", default="figures")
    args = ap.parse_args()

    sizes = (8, 16) if args.quick else (64, 128)
    steps = 5 if args.quick else 9
    dphi = [round(-0.2 + 0.4 * i / (steps - 1), 10) for i in range(steps)]
    domega = [round(-0.5 + 1.0 * i / (steps - 1), 10) for i in range(steps)]
    data = Path(args.data_dir)
    figs = Path(args.fig_dir)
    figs.mkdir(parents=True, exist_ok=True)

    maps = []
    for n in sizes:
        out = data / f"heatmap_N{n}"
        btc_sense({
            "mode": "sweep-resonance",
            "params": {"n_spins": n, "omega0": 4.0, "t_max": 0.75 * n,
                       "n_out": 900, "rtol": 1e-7, "atol": 1e-9},
            "delta_phi_grid": dphi,
            "delta_omega_grid": domega,
            "n_workers": args.n_workers,
            "output_dir": str(out),
        })
        maps.append(str(out / "heatmap.csv"))
    run(["btc-plots", "heatmap", "--in", *maps,
         "--out", str(figs / "resonance_maps.png")])


if __name__ == "__main__":
    main()
