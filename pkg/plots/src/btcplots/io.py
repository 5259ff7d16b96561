"""Readers for the simulator's CSV/JSON output files, with schema checks.

These figures never recompute physics: everything rendered is read from a
file the simulator wrote.  Readers therefore validate headers eagerly and
fail with the offending column or grid point named.
"""

import csv
import json

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the expected column schema."""


class GridError(ValueError):
    """Heatmap grid is incomplete; lists the missing points."""


def read_columns(path: str, required: tuple[str, ...] = ()) -> dict:
    """All columns of a CSV as float arrays keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: file is empty, expected a header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing required columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return {
        name: np.array([float(r[name]) for r in rows])
        for name in reader.fieldnames
    }


def read_fits(path: str) -> list[dict]:
    """Entries of an ansatz-fit JSON ({"fits": [...]})."""
    with open(path) as fh:
        doc = json.load(fh)
    fits = doc.get("fits")
    if not isinstance(fits, list):
        raise SchemaError(f"{path}: expected a top-level 'fits' list")
    for i, entry in enumerate(fits):
        for key in ("c_amp", "alpha", "gamma"):
            if key not in entry:
                raise SchemaError(f"{path}: fits[{i}] missing key {key!r}")
    return fits


def read_scaling_fits(path: str) -> dict:
    """scaling_fits.json, holding the combined N-scaling fit parameters."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return doc


def heatmap_grid(data: dict, path: str = "heatmap.csv"):
    """Pivot heatmap rows into a (dphi, domega) -> value matrix.

    Every pair of the cartesian product of the distinct axis values must be
    present exactly once; anything else raises GridError naming the points.
    """
    dphi = data["delta_phi"]
    domega = data["delta_omega"]
    values = data["max_qfi"]
    phis = np.unique(dphi)
    omegas = np.unique(domega)
    grid = np.full((phis.size, omegas.size), np.nan)
    seen = np.zeros_like(grid, dtype=int)
    for p, o, v in zip(dphi, domega, values):
        i = int(np.searchsorted(phis, p))
        j = int(np.searchsorted(omegas, o))
        grid[i, j] = v
        seen[i, j] += 1
    missing = [
        (float(phis[i]), float(omegas[j]))
        for i, j in zip(*np.nonzero(seen == 0))
    ]
    if missing:
        raise GridError(f"{path}: incomplete grid, missing points {missing}")
    duplicated = [
        (float(phis[i]), float(omegas[j]))
        for i, j in zip(*np.nonzero(seen > 1))
    ]
    if duplicated:
        raise GridError(f"{path}: duplicated grid points {duplicated}")
    return phis, omegas, grid


def infer_n_spins(data: dict) -> int | None:
    """N as stored in the file via the qfi / qfi_over_n column pair."""
    if "qfi" not in data or "qfi_over_n" not in data:
        return None
    mask = data["qfi_over_n"] > 0
    if not np.any(mask):
        return None
    return int(round(float(np.median(data["qfi"][mask] / data["qfi_over_n"][mask]))))
