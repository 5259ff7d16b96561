"""Figure renderers for the simulator's output files.

Each renderer takes a FigureSpec, draws from the input files only, writes
the image, and returns the matplotlib Figure so tests can inspect exactly
what was drawn.
"""

import os
import warnings
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    SchemaError,
    heatmap_grid,
    infer_n_spins,
    read_columns,
    read_fits,
    read_scaling_fits,
)

KINDS = ("dynamics", "scaling", "heatmap", "observables", "mf-compare", "alpha-kappa")


@dataclass
class FigureSpec:
    kind: str
    inputs: list[str]
    out_path: str
    fits: str | None = None
    log_x: bool = False
    log_y: bool = False
    rescale_by_n: bool = True
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input file is required")


def _finish(fig, spec: FigureSpec):
    directory = os.path.dirname(os.path.abspath(spec.out_path))
    os.makedirs(directory, exist_ok=True)
    fig.savefig(spec.out_path, dpi=spec.dpi, bbox_inches="tight")
    plt.close(fig)  # drop the pyplot registration; the object stays inspectable
    return fig


def plot_dynamics(spec: FigureSpec):
    """QFI over time, one solid curve per trajectory; dashed ansatz overlays
    when a fit JSON is supplied."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    fit_entries = read_fits(spec.fits) if spec.fits else []
    for idx, path in enumerate(spec.inputs):
        data = read_columns(path, required=("t", "qfi", "qfi_over_n"))
        y = data["qfi_over_n"] if spec.rescale_by_n else data["qfi"]
        n = infer_n_spins(data)
        label = f"N = {n}" if n else os.path.basename(path)
        (line,) = ax.plot(data["t"], y, lw=1.0, label=label)
        if idx < len(fit_entries):
            e = fit_entries[idx]
            t = data["t"][data["t"] > 0]
            curve = e["c_amp"] * t ** e["alpha"] * np.exp(-e["gamma"] * t)
            scale_n = e.get("n_spins") or n
            if spec.rescale_by_n and scale_n:
                curve = curve / scale_n
            ax.plot(t, curve, ls="--", color=line.get_color(), lw=1.2)
    ax.set_xlabel(r"$t\,\kappa$")
    ax.set_ylabel(r"$F/N$" if spec.rescale_by_n else r"$F$")
    if spec.log_x:
        ax.set_xscale("log")
    if spec.log_y:
        ax.set_yscale("log")
    ax.legend(frameon=False, fontsize=8)
    return _finish(fig, spec)


def plot_heatmap(spec: FigureSpec):
    """Peak QFI over the detuning grid; one panel per input file, maximum
    marked, NaN cells in the sentinel color."""
    fig, axes = plt.subplots(
        1, len(spec.inputs), figsize=(4.6 * len(spec.inputs), 3.8), squeeze=False
    )
    for ax, path in zip(axes[0], spec.inputs):
        data = read_columns(
            path, required=("delta_phi", "delta_omega", "max_qfi", "t_of_max")
        )
        phis, omegas, grid = heatmap_grid(data, path)
        masked = np.ma.masked_invalid(grid)
        cmap = plt.get_cmap("viridis").copy()
        cmap.set_bad("lightgray")
        mesh = ax.pcolormesh(omegas, phis, masked, cmap=cmap, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=r"$\max_t F$")
        if np.any(np.isfinite(grid)):
            i, j = np.unravel_index(np.nanargmax(grid), grid.shape)
            ax.plot(omegas[j], phis[i], marker="*", color="red", ms=12, mew=0.5)
        ax.set_xlabel(r"$\Delta\omega_{\mathrm{ac}}/\kappa$")
        ax.set_ylabel(r"$\Delta\phi/\pi$")
        ax.set_title(os.path.basename(path), fontsize=8)
    return _finish(fig, spec)


def plot_scaling(spec: FigureSpec):
    """Fitted ansatz parameters versus N: alpha, gamma (log-log), C, and the
    fitted peak height (log-log), with trend curves from scaling_fits.json."""
    data = read_columns(
        spec.inputs[0],
        required=("n_spins", "c_amp", "alpha", "gamma", "f_star_empirical"),
    )
    fits = read_scaling_fits(spec.fits) if spec.fits else {}
    n = data["n_spins"]
    single = n.size < 2
    if single:
        warnings.warn("single-row scaling input: points only, no trend lines")

    fig, axes = plt.subplots(2, 2, figsize=(8.0, 6.0))
    panels = [
        (axes[0, 0], "alpha", r"$\alpha$", False),
        (axes[0, 1], "gamma", r"$\gamma/\kappa$", True),
        (axes[1, 0], "c_amp", r"$C$", True),
        (axes[1, 1], "f_star_empirical", r"$F^*$", True),
    ]
    for ax, column, label, loglog in panels:
        ax.plot(n, data[column], "o", ms=5)
        ax.set_xlabel(r"$N$")
        ax.set_ylabel(label)
        if loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")

    if not single and fits.get("gamma_power_law"):
        g = fits["gamma_power_law"]
        ax = axes[0, 1]
        ax.plot(n, g["prefactor"] * n ** g["exponent"], "--", lw=1.0)
        ax.annotate(
            f"slope {g['exponent']:.2f}", xy=(0.05, 0.08), xycoords="axes fraction",
            fontsize=9,
        )
    if not single and fits.get("alpha_asymptote"):
        a = fits["alpha_asymptote"]
        ax = axes[0, 0]
        nn = np.linspace(n.min(), n.max(), 200)
        ax.plot(nn, a["a"] * np.exp(-a["b"] * nn) + a["alpha_inf"], "--", lw=1.0)
        ax.axhline(a["alpha_inf"], color="gray", lw=0.6, ls=":")
    fig.tight_layout()
    return _finish(fig, spec)


def plot_observables(spec: FigureSpec):
    """Magnetization variance, coherence, and entropy panels per trajectory."""
    fig, axes = plt.subplots(1, 3, figsize=(11.0, 3.4))
    for path in spec.inputs:
        data = read_columns(
            path, required=("t", "var_sz", "var_sz_over_n", "sy", "entropy")
        )
        n = infer_n_spins(data)
        label = f"N = {n}" if n else os.path.basename(path)
        var = data["var_sz_over_n"] if spec.rescale_by_n else data["var_sz"]
        sy = data["sy"] / n if (spec.rescale_by_n and n) else data["sy"]
        axes[0].plot(data["t"], var, lw=1.0, label=label)
        axes[1].plot(data["t"], sy, lw=1.0, label=label)
        axes[2].plot(data["t"], data["entropy"], lw=1.0, label=label)
    axes[0].set_ylabel(r"$\mathrm{var}(S^z)/N$" if spec.rescale_by_n else r"$\mathrm{var}(S^z)$")
    axes[1].set_ylabel(r"$\langle S^y\rangle/N$" if spec.rescale_by_n else r"$\langle S^y\rangle$")
    axes[2].set_ylabel(r"$S_{\mathrm{vN}}$")
    for ax in axes:
        ax.set_xlabel(r"$t\,\kappa$")
    axes[0].legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _finish(fig, spec)


def plot_mf_compare(spec: FigureSpec):
    """Exact per-spin QFI for each N next to the factorized mean-field one."""
    data = read_columns(spec.inputs[0], required=("t", "qfi_mf_over_n"))
    exact_cols = sorted(
        (c for c in data if c.startswith("qfi_exact_over_n_")),
        key=lambda c: int(c.rsplit("_", 1)[1]),
    )
    if not exact_cols:
        raise SchemaError(
            f"{spec.inputs[0]}: missing required columns ['qfi_exact_over_n_<N>']"
        )
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for col in exact_cols:
        ax.plot(data["t"], data[col], lw=1.0, label=f"exact, N = {col.rsplit('_', 1)[1]}")
    ax.plot(data["t"], data["qfi_mf_over_n"], "k--", lw=1.4, label="mean field")
    ax.set_xlabel(r"$t\,\kappa$")
    ax.set_ylabel(r"$F/N$")
    if spec.log_x:
        ax.set_xscale("log")
    if spec.log_y:
        ax.set_yscale("log")
    ax.legend(frameon=False, fontsize=8)
    return _finish(fig, spec)


def plot_alpha_kappa(spec: FigureSpec):
    """Asymptotic growth exponent versus the dissipation ratio."""
    data = read_columns(spec.inputs[0], required=("kappa_over_omega0", "alpha_inf"))
    order = np.argsort(data["kappa_over_omega0"])
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(data["kappa_over_omega0"][order], data["alpha_inf"][order], "o-", ms=5)
    ax.set_xlabel(r"$\kappa/\omega_0$")
    ax.set_ylabel(r"$\alpha_\infty$")
    if spec.log_x:
        ax.set_xscale("log")
    return _finish(fig, spec)


RENDERERS = {
    "dynamics": plot_dynamics,
    "scaling": plot_scaling,
    "heatmap": plot_heatmap,
    "observables": plot_observables,
    "mf-compare": plot_mf_compare,
    "alpha-kappa": plot_alpha_kappa,
}


def render(spec: FigureSpec):
    return RENDERERS[spec.kind](spec)
