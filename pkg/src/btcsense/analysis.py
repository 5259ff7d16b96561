"""Envelope extraction, growth/decay ansatz fitting, and resource scalings.

The QFI of a run oscillates under a smooth envelope; fitting the raw
samples biases the growth exponent, so the envelope (strict local maxima)
is extracted first.  The ansatz

    F(t) = C * t**alpha * exp(-gamma * t)

is exactly linear in (log C, alpha, gamma) after taking logs, so the fit
is a deterministic linear least-squares problem rather than a nonlinear
search.  Scaling fits over the spin number N reuse the same machinery.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory


class FitFailure(RuntimeError):
    """Fit could not be performed (degenerate or rank-deficient data)."""


@dataclass(frozen=True)
class AnsatzFit:
    """Parameters of C * t**alpha * exp(-gamma t) fitted in log space."""

    c_amp: float
    alpha: float
    gamma: float
    rms_log_residual: float
    n_points: int

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.c_amp * t**self.alpha * np.exp(-self.gamma * t)


@dataclass(frozen=True)
class ScalingFit:
    kind: str  # "gamma_power_law" or "alpha_asymptote"
    parameters: dict
    rms_residual: float


@dataclass(frozen=True)
class PeakSummary:
    """Fitted peak (t* = alpha/gamma) next to the raw sampled maximum.

    The fitted values are None when gamma = 0 (no decay, no finite peak);
    the empirical values are always available.
    """

    t_star: float | None
    f_star: float | None
    t_star_empirical: float
    f_star_empirical: float


def envelope_points(
    times: np.ndarray, values: np.ndarray, threshold_fraction: float = 0.01
) -> np.ndarray:
    """Strict interior local maxima of a sampled series, as (t, F) rows.

    Points below ``threshold_fraction`` of the global maximum are dropped;
    if fewer than 3 local maxima survive (e.g. a monotone series), all
    points above the threshold are returned instead.
    """
    if not 0.0 < threshold_fraction < 1.0:
        raise ValueError(f"threshold_fraction must be in (0, 1), got {threshold_fraction!r}")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    peak = float(np.max(values)) if values.size else 0.0
    if peak <= 0.0:
        raise ValueError("empty envelope: series has no positive values")
    floor = threshold_fraction * peak
    interior = np.arange(1, values.size - 1)
    is_max = (values[interior] > values[interior - 1]) & (
        values[interior] > values[interior + 1]
    )
    idx = interior[is_max & (values[interior] >= floor)]
    if idx.size < 3:
        idx = np.flatnonzero(values >= floor)
    return np.column_stack([times[idx], values[idx]])


def extract_envelope(traj: Trajectory, threshold_fraction: float = 0.01) -> np.ndarray:
    """QFI envelope of a trajectory; see ``envelope_points``."""
    return envelope_points(traj.times, traj.qfi, threshold_fraction)


def fit_ansatz(points: np.ndarray) -> AnsatzFit:
    """Least-squares fit of log F = log C + alpha log t - gamma t.

    Solved by orthogonal decomposition (SVD-backed lstsq).  A negative
    unconstrained gamma is treated as "no decay visible": the fit is
    redone with gamma pinned to 0.

    Raises
    ------
    FitFailure
        If the design matrix is rank-deficient (e.g. all t identical).
    ValueError
        If fewer than 3 points, or any t <= 0 or F <= 0.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError(f"need at least 3 (t, F) rows, got shape {pts.shape}")
    t, f = pts[:, 0], pts[:, 1]
    if np.any(t <= 0) or np.any(f <= 0):
        raise ValueError("ansatz fit requires t > 0 and F > 0 for every point")

    log_f = np.log(f)
    design = np.column_stack([np.ones_like(t), np.log(t), -t])
    coef, _, rank, _ = np.linalg.lstsq(design, log_f, rcond=None)
    if rank < 3:
        raise FitFailure("rank-deficient ansatz design (identical t values?)")
    gamma = float(coef[2])
    if gamma < 0.0:
        design2 = design[:, :2]
        coef2, _, rank2, _ = np.linalg.lstsq(design2, log_f, rcond=None)
        if rank2 < 2:
            raise FitFailure("rank-deficient ansatz design (identical t values?)")
        coef = np.array([coef2[0], coef2[1], 0.0])
        gamma = 0.0
    resid = design @ coef - log_f
    return AnsatzFit(
        c_amp=float(np.exp(coef[0])),
        alpha=float(coef[1]),
        gamma=gamma,
        rms_log_residual=float(np.sqrt(np.mean(resid**2))),
        n_points=int(t.size),
    )


def peak_summary(fit: AnsatzFit, traj: Trajectory) -> PeakSummary:
    """Fitted t* = alpha/gamma and F* = C t*^alpha e^-alpha vs the raw max."""
    qfi = traj.qfi
    i = int(np.argmax(qfi))
    if fit.gamma > 0.0:
        t_star = fit.alpha / fit.gamma
        f_star = fit.c_amp * t_star**fit.alpha * np.exp(-fit.alpha)
    else:
        t_star = None
        f_star = None
    return PeakSummary(
        t_star=t_star,
        f_star=f_star,
        t_star_empirical=float(traj.times[i]),
        f_star_empirical=float(qfi[i]),
    )


def fit_gamma_scaling(data: np.ndarray) -> ScalingFit:
    """Power-law fit gamma = prefactor * N**exponent on log-log axes."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or np.unique(arr[:, 0]).size < 3:
        raise ValueError("need (N, gamma) rows with at least 3 distinct N")
    if np.any(arr[:, 1] <= 0):
        raise ValueError("gamma values must be positive for a log-log fit")
    log_n = np.log(arr[:, 0])
    log_g = np.log(arr[:, 1])
    design = np.column_stack([np.ones_like(log_n), log_n])
    coef, _, _, _ = np.linalg.lstsq(design, log_g, rcond=None)
    resid = design @ coef - log_g
    return ScalingFit(
        kind="gamma_power_law",
        parameters={"prefactor": float(np.exp(coef[0])), "exponent": float(coef[1])},
        rms_residual=float(np.sqrt(np.mean(resid**2))),
    )


def _asymptote_ssr(u: float, n: np.ndarray, alpha: np.ndarray):
    """Inner linear solve for (a, alpha_inf) at fixed b = exp(u)."""
    design = np.column_stack([np.exp(-np.exp(u) * n), np.ones_like(n)])
    coef, _, _, _ = np.linalg.lstsq(design, alpha, rcond=None)
    resid = design @ coef - alpha
    return float(resid @ resid), coef


def fit_alpha_asymptote(data: np.ndarray) -> ScalingFit:
    """Fit alpha(N) = a exp(-b N) + alpha_inf.

    The problem is linear in (a, alpha_inf) at fixed b, so the outer search
    is one-dimensional: a coarse scan over log b in [-6, 1] brackets the
    optimum, then golden-section refines it.  Constant data comes out as
    a = 0 with alpha_inf the mean (b is then arbitrary).
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or np.unique(arr[:, 0]).size < 4:
        raise ValueError("need (N, alpha) rows with at least 4 distinct N")
    n, alpha = arr[:, 0], arr[:, 1]

    lo, hi = -6.0, 1.0
    grid = np.linspace(lo, hi, 29)
    ssr_grid = [_asymptote_ssr(u, n, alpha)[0] for u in grid]
    i_best = int(np.argmin(ssr_grid))
    a_lo = grid[max(i_best - 1, 0)]
    a_hi = grid[min(i_best + 1, grid.size - 1)]

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = a_hi - invphi * (a_hi - a_lo)
    x2 = a_lo + invphi * (a_hi - a_lo)
    f1 = _asymptote_ssr(x1, n, alpha)[0]
    f2 = _asymptote_ssr(x2, n, alpha)[0]
    for _ in range(96):
        if f1 <= f2:
            a_hi, x2, f2 = x2, x1, f1
            x1 = a_hi - invphi * (a_hi - a_lo)
            f1 = _asymptote_ssr(x1, n, alpha)[0]
        else:
            a_lo, x1, f1 = x1, x2, f2
            x2 = a_lo + invphi * (a_hi - a_lo)
            f2 = _asymptote_ssr(x2, n, alpha)[0]
    u_best = x1 if f1 <= f2 else x2
    ssr, coef = _asymptote_ssr(u_best, n, alpha)
    return ScalingFit(
        kind="alpha_asymptote",
        parameters={
            "a": float(coef[0]),
            "b": float(np.exp(u_best)),
            "alpha_inf": float(coef[1]),
        },
        rms_residual=float(np.sqrt(ssr / n.size)),
    )
