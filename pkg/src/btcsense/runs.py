"""Run orchestration: single runs, resonance sweeps, scans, MF comparison.

Workers receive fully resolved, immutable parameter sets and results are
collected in grid order before serialization, so output bytes do not
depend on the worker count.  A failed grid point becomes a NaN row plus a
log line; completed work is never discarded because one point diverged.
"""

import csv
import dataclasses
import logging
import math
import multiprocessing
import os
import time

import numpy as np

from . import __version__
from .analysis import envelope_points, extract_envelope, fit_alpha_asymptote, fit_ansatz, fit_gamma_scaling, peak_summary
from .config import ConfigError, RunConfig, resonance_defaults
from .dynamics import SimParams, Trajectory, integrate
from .integrator import IntegrationFailure
from .meanfield import mf_qfi_series
from .serialize import write_csv, write_json

logger = logging.getLogger("btcsense")

TRAJECTORY_COLUMNS = [
    "t", "qfi", "qfi_over_n", "sy", "sz", "var_sz", "var_sz_over_n",
    "entropy", "purity",
]
HEATMAP_COLUMNS = ["delta_phi", "delta_omega", "max_qfi", "t_of_max"]
SCALING_COLUMNS = [
    "n_spins", "c_amp", "alpha", "gamma", "rms_log_residual",
    "t_star", "f_star", "t_star_empirical", "f_star_empirical",
]
KAPPA_SCAN_COLUMNS = [
    "kappa", "omega0", "kappa_over_omega0", "alpha_inf", "a", "b",
    "rms_residual",
]


def _params_doc(params: SimParams) -> dict:
    return dataclasses.asdict(params)


def _write_run_json(path: str, config: RunConfig, params: SimParams, extra: dict) -> None:
    doc = {
        "mode": config.mode,
        "version": __version__,
        "params": _params_doc(params),
        "output_dir": config.output_dir,
        "n_workers": config.n_workers,
    }
    doc.update(extra)
    write_json(path, doc)


def _trajectory_rows(traj: Trajectory):
    n = traj.params.n_spins
    for r in traj.records:
        yield (r.t, r.qfi, r.qfi / n, r.sy, r.sz, r.var_sz, r.var_sz / n,
               r.entropy, r.purity)


def write_trajectory_csv(path: str, traj: Trajectory) -> None:
    write_csv(path, TRAJECTORY_COLUMNS, _trajectory_rows(traj))


def _map_tasks(worker, tasks, n_workers: int):
    """Run tasks in order-preserving fashion, optionally across processes."""
    if n_workers <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with multiprocessing.Pool(processes=min(n_workers, len(tasks))) as pool:
        return pool.map(worker, tasks, chunksize=1)


def run_simulate(config: RunConfig) -> dict:
    """Integrate one parameter set; write trajectory.csv and run.json.

    On integration failure the samples reached so far are flushed to
    trajectory_partial.csv and flagged in run.json before re-raising.
    """
    params = config.resolve_field().resolve()
    started = time.perf_counter()
    try:
        traj = integrate(params)
    except IntegrationFailure as exc:
        partial = getattr(exc, "partial_trajectory", None)
        os.makedirs(config.output_dir, exist_ok=True)
        if partial is not None and partial.records:
            write_trajectory_csv(
                os.path.join(config.output_dir, "trajectory_partial.csv"), partial
            )
        _write_run_json(
            os.path.join(config.output_dir, "run.json"), config, params,
            {"failed": True, "error": str(exc), "last_good_time": exc.last_good_time},
        )
        raise
    wall = time.perf_counter() - started
    os.makedirs(config.output_dir, exist_ok=True)
    traj_path = os.path.join(config.output_dir, "trajectory.csv")
    write_trajectory_csv(traj_path, traj)
    run_path = os.path.join(config.output_dir, "run.json")
    _write_run_json(
        run_path, config, params,
        {"wall_time_s": wall, "n_steps": traj.n_steps, "n_rejected": traj.n_rejected},
    )
    return {"paths": {"trajectory": traj_path, "run": run_path}, "trajectory": traj}


def _sweep_point(task):
    dphi, domega, params = task
    try:
        traj = integrate(params)
    except IntegrationFailure as exc:
        return (dphi, domega, math.nan, math.nan, str(exc))
    q = traj.qfi
    i = int(np.argmax(q))
    return (dphi, domega, float(q[i]), float(traj.times[i]), None)


def run_sweep_resonance(config: RunConfig) -> dict:
    """Detuning grid around the resonance point; one row per (dphi, domega).

    The grid is parameterized as omega_ac = omega_btc + delta_omega and
    phi = phi_btc + pi * delta_phi.  Failed points are logged and recorded
    as NaN rows rather than aborting the sweep.
    """
    base = config.params
    try:
        omega_btc, phi_btc = resonance_defaults(
            base.omega0, base.kappa, config.resonance_arcsin_omega
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tasks = []
    for dphi in config.delta_phi_grid:
        for domega in config.delta_omega_grid:
            point = dataclasses.replace(
                base, omega_ac=omega_btc + domega, phi=phi_btc + math.pi * dphi
            ).resolve()
            tasks.append((dphi, domega, point))
    started = time.perf_counter()
    results = _map_tasks(_sweep_point, tasks, config.n_workers)
    wall = time.perf_counter() - started
    rows = []
    n_failed = 0
    for dphi, domega, max_qfi, t_of_max, error in results:
        if error is not None:
            n_failed += 1
            logger.warning(
                "sweep point (dphi=%g, domega=%g) failed: %s", dphi, domega, error
            )
        rows.append((dphi, domega, max_qfi, t_of_max))
    os.makedirs(config.output_dir, exist_ok=True)
    heatmap_path = os.path.join(config.output_dir, "heatmap.csv")
    write_csv(heatmap_path, HEATMAP_COLUMNS, rows)
    run_path = os.path.join(config.output_dir, "run.json")
    _write_run_json(
        run_path, config, config.resolve_field().resolve(),
        {
            "wall_time_s": wall,
            "resonance": {"omega_btc": omega_btc, "phi_btc": phi_btc},
            "delta_phi_grid": list(config.delta_phi_grid),
            "delta_omega_grid": list(config.delta_omega_grid),
            "n_failed": n_failed,
        },
    )
    return {"paths": {"heatmap": heatmap_path, "run": run_path}, "rows": rows}


def _fit_point(task):
    """Integrate one scan point and fit the envelope ansatz."""
    key, params, threshold, traj_path = task
    traj = integrate(params)
    if traj_path is not None:
        write_trajectory_csv(traj_path, traj)
    env = extract_envelope(traj, threshold)
    fit = fit_ansatz(env)
    peaks = peak_summary(fit, traj)
    return (
        key,
        {
            "n_spins": params.n_spins,
            "c_amp": fit.c_amp,
            "alpha": fit.alpha,
            "gamma": fit.gamma,
            "rms_log_residual": fit.rms_log_residual,
            "t_star": peaks.t_star,
            "f_star": peaks.f_star,
            "t_star_empirical": peaks.t_star_empirical,
            "f_star_empirical": peaks.f_star_empirical,
        },
    )


def _scaling_row(entry: dict):
    return tuple(entry[name] for name in SCALING_COLUMNS)


def _scaling_fits(entries: list[dict]) -> dict:
    """Combined N-scalings of the fitted parameters, where computable."""
    doc: dict = {"gamma_power_law": None, "alpha_asymptote": None}
    gammas = [(e["n_spins"], e["gamma"]) for e in entries if e["gamma"] > 0]
    if len({n for n, _ in gammas}) >= 3:
        fit = fit_gamma_scaling(np.array(gammas, dtype=float))
        doc["gamma_power_law"] = dict(fit.parameters, rms_residual=fit.rms_residual)
    else:
        logger.warning("too few positive-gamma points for a gamma power law")
    alphas = [(e["n_spins"], e["alpha"]) for e in entries]
    if len({n for n, _ in alphas}) >= 4:
        fit = fit_alpha_asymptote(np.array(alphas, dtype=float))
        doc["alpha_asymptote"] = dict(fit.parameters, rms_residual=fit.rms_residual)
    else:
        logger.warning("too few points for an alpha asymptote fit")
    return doc


def run_scan_n(config: RunConfig) -> dict:
    """Resonant run + ansatz fit per N; scaling.csv and scaling_fits.json."""
    os.makedirs(config.output_dir, exist_ok=True)
    tasks = []
    for n in config.n_grid:
        point = config.resolve_field(
            dataclasses.replace(config.params, n_spins=int(n))
        ).resolve()
        traj_path = os.path.join(config.output_dir, f"trajectory_N{int(n)}.csv")
        tasks.append((int(n), point, config.envelope_threshold, traj_path))
    started = time.perf_counter()
    results = _map_tasks(_fit_point, tasks, config.n_workers)
    wall = time.perf_counter() - started
    entries = [entry for _, entry in results]
    scaling_path = os.path.join(config.output_dir, "scaling.csv")
    write_csv(scaling_path, SCALING_COLUMNS, [_scaling_row(e) for e in entries])
    fits_doc = _scaling_fits(entries)
    fits_path = os.path.join(config.output_dir, "scaling_fits.json")
    write_json(fits_path, fits_doc)
    run_path = os.path.join(config.output_dir, "run.json")
    _write_run_json(
        run_path, config, config.params,
        {"wall_time_s": wall, "n_grid": [int(n) for n in config.n_grid]},
    )
    return {
        "paths": {"scaling": scaling_path, "fits": fits_path, "run": run_path},
        "entries": entries,
        "fits": fits_doc,
    }


def run_scan_kappa(config: RunConfig) -> dict:
    """alpha_inf per kappa: an inner N-scan and asymptote fit at each kappa."""
    os.makedirs(config.output_dir, exist_ok=True)
    tasks = []
    for i, kappa in enumerate(config.kappa_grid):
        for n in config.n_grid:
            point = config.resolve_field(
                dataclasses.replace(
                    config.params, n_spins=int(n), kappa=float(kappa),
                    omega_ac=None, phi=None,
                )
            ).resolve()
            tasks.append(((i, int(n)), point, config.envelope_threshold, None))
    started = time.perf_counter()
    results = _map_tasks(_fit_point, tasks, config.n_workers)
    wall = time.perf_counter() - started

    rows = []
    per_kappa_entries: dict = {}
    for (i, _n), entry in results:
        per_kappa_entries.setdefault(i, []).append(entry)
    for i, kappa in enumerate(config.kappa_grid):
        entries = per_kappa_entries[i]
        scaling_path = os.path.join(config.output_dir, f"scaling_kappa{i}.csv")
        write_csv(scaling_path, SCALING_COLUMNS, [_scaling_row(e) for e in entries])
        fit = fit_alpha_asymptote(
            np.array([(e["n_spins"], e["alpha"]) for e in entries], dtype=float)
        )
        rows.append(
            (
                float(kappa),
                config.params.omega0,
                float(kappa) / config.params.omega0,
                fit.parameters["alpha_inf"],
                fit.parameters["a"],
                fit.parameters["b"],
                fit.rms_residual,
            )
        )
    scan_path = os.path.join(config.output_dir, "kappa_scan.csv")
    write_csv(scan_path, KAPPA_SCAN_COLUMNS, rows)
    run_path = os.path.join(config.output_dir, "run.json")
    _write_run_json(
        run_path, config, config.params,
        {
            "wall_time_s": wall,
            "kappa_grid": [float(k) for k in config.kappa_grid],
            "n_grid": [int(n) for n in config.n_grid],
        },
    )
    return {"paths": {"kappa_scan": scan_path, "run": run_path}, "rows": rows}


def _exact_qfi_point(task):
    n, params = task
    traj = integrate(params)
    return (n, traj.qfi)


def run_compare_mf(config: RunConfig) -> dict:
    """Exact QFI per N next to the factorized mean-field QFI, per spin."""
    base = config.resolve_field()
    t_max = base.t_max
    if t_max is None:
        if base.kappa == 0:
            raise ConfigError("compare-mf requires an explicit t_max when kappa == 0")
        t_max = base.t_max_factor * max(config.n_grid) / base.kappa
    tasks = []
    for n in config.n_grid:
        point = dataclasses.replace(base, n_spins=int(n), t_max=t_max).resolve()
        tasks.append((int(n), point))
    started = time.perf_counter()
    results = _map_tasks(_exact_qfi_point, tasks, config.n_workers)
    mf_params = dataclasses.replace(base, t_max=t_max, g=0.0)
    mf_series = mf_qfi_series(mf_params, config.mf_dg)
    wall = time.perf_counter() - started

    times = np.linspace(0.0, t_max, base.n_out)
    header = ["t"] + [f"qfi_exact_over_n_{n}" for n, _ in results] + ["qfi_mf_over_n"]
    columns = [times] + [q / n for n, q in results] + [
        mf_series[:, 1] / mf_params.n_spins
    ]
    rows = list(zip(*columns))
    os.makedirs(config.output_dir, exist_ok=True)
    compare_path = os.path.join(config.output_dir, "mf_compare.csv")
    write_csv(compare_path, header, rows)
    run_path = os.path.join(config.output_dir, "run.json")
    _write_run_json(
        run_path, config, dataclasses.replace(base, t_max=t_max),
        {
            "wall_time_s": wall,
            "n_grid": [int(n) for n in config.n_grid],
            "mf_dg": config.mf_dg,
        },
    )
    return {"paths": {"mf_compare": compare_path, "run": run_path}}


def read_trajectory_csv(path: str) -> dict:
    """Columns of a trajectory.csv as float arrays, keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigError(f"{path}: empty file, expected a trajectory CSV")
        missing = [c for c in ("t", "qfi") if c not in reader.fieldnames]
        if missing:
            raise ConfigError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return {
        name: np.array([float(row[name]) for row in rows])
        for name in rows[0].keys()
    }


def _infer_n_spins(data: dict) -> int | None:
    if "qfi_over_n" not in data:
        return None
    mask = data["qfi_over_n"] > 0
    if not np.any(mask):
        return None
    ratios = data["qfi"][mask] / data["qfi_over_n"][mask]
    return int(round(float(np.median(ratios))))


def run_fit(config: RunConfig) -> dict:
    """Fit the envelope ansatz to stored trajectory CSVs; ansatz_fit.json."""
    fits = []
    for path in config.fit_inputs:
        data = read_trajectory_csv(path)
        t, q = data["t"], data["qfi"]
        env = envelope_points(t, q, config.envelope_threshold)
        fit = fit_ansatz(env)
        i = int(np.argmax(q))
        if fit.gamma > 0:
            t_star = fit.alpha / fit.gamma
            f_star = fit.c_amp * t_star**fit.alpha * math.exp(-fit.alpha)
        else:
            t_star = None
            f_star = None
        fits.append(
            {
                "source": path,
                "n_spins": _infer_n_spins(data),
                "c_amp": fit.c_amp,
                "alpha": fit.alpha,
                "gamma": fit.gamma,
                "rms_log_residual": fit.rms_log_residual,
                "n_points": fit.n_points,
                "t_star": t_star,
                "f_star": f_star,
                "t_star_empirical": float(t[i]),
                "f_star_empirical": float(q[i]),
            }
        )
    os.makedirs(config.output_dir, exist_ok=True)
    fit_path = os.path.join(config.output_dir, "ansatz_fit.json")
    write_json(fit_path, {"fits": fits})
    return {"paths": {"ansatz_fit": fit_path}, "fits": fits}


RUNNERS = {
    "simulate": run_simulate,
    "sweep-resonance": run_sweep_resonance,
    "scan-n": run_scan_n,
    "scan-kappa": run_scan_kappa,
    "compare-mf": run_compare_mf,
    "fit": run_fit,
}
