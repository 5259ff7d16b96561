"""Quantum Fisher information estimators and metrological reference bounds.

Two independent estimation routes are provided: the spectral formula over
the eigendecomposition of the state, and a Bures-fidelity finite difference
between states at neighboring field strengths.  They are cross-checked
against each other in the test suite and must not be merged.
"""

import math
from dataclasses import dataclass

import numpy as np

DENOM_CUTOFF = 1e-12
HERM_TOL = 1e-8


@dataclass(frozen=True)
class QfiValue:
    """Spectral-formula result: the QFI and how many (k, l) eigenpairs passed
    the denominator cutoff."""

    value: float
    n_terms_kept: int


@dataclass(frozen=True)
class BoundReport:
    """Reference QFI scalings at (n_spins, t): classical N*t, separable
    coherent N*t^2, and Heisenberg N^2*t^2."""

    classical: float
    coherent: float
    heisenberg: float


def _check_hermitian(x: np.ndarray, name: str) -> None:
    dev = float(np.max(np.abs(x - x.conj().T)))
    if dev > HERM_TOL:
        raise ValueError(f"{name} is not Hermitian: max deviation {dev:g}")


def _qfi_from_eigh(lam: np.ndarray, vecs: np.ndarray, drho: np.ndarray):
    """Spectral-formula core on a precomputed eigendecomposition of rho.

    Shared with the observable sampler so one eigh serves both the entropy
    and the QFI of a sample.  Returns (value, n_terms_kept).
    """
    lam = np.clip(lam, 0.0, None)
    m = vecs.conj().T @ drho @ vecs
    denom = lam[:, None] + lam[None, :]
    mask = denom > DENOM_CUTOFF
    value = 2.0 * float(np.sum((np.abs(m[mask]) ** 2) / denom[mask]))
    return value, int(np.count_nonzero(mask))


def qfi_spectral(rho: np.ndarray, drho: np.ndarray) -> QfiValue:
    """QFI from the eigendecomposition of the state.

    With rho = sum_k lam_k |k><k| the value is

        F = 2 * sum_{k,l} |<k| drho |l>|^2 / (lam_k + lam_l)

    restricted to pairs with lam_k + lam_l above a 1e-12 cutoff; negative
    eigenvalues from round-off are clamped to zero before the cutoff test.

    Parameters
    ----------
    rho : np.ndarray
        Hermitian unit-trace density matrix.
    drho : np.ndarray
        Hermitian traceless derivative of the state with respect to the
        estimated parameter.
    """
    if rho.shape != drho.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs drho {drho.shape}")
    _check_hermitian(rho, "rho")
    _check_hermitian(drho, "drho")

    lam, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    value, n_kept = _qfi_from_eigh(lam, vecs, drho)
    return QfiValue(value=value, n_terms_kept=n_kept)


def fidelity(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)).

    Computed with two Hermitian eigendecompositions; tiny negative
    eigenvalues from round-off are clamped to zero.  Returns a value in
    [0, 1] up to round-off.
    """
    if rho_a.shape != rho_b.shape:
        raise ValueError(
            f"dimension mismatch: rho_a {rho_a.shape} vs rho_b {rho_b.shape}"
        )
    lam, vecs = np.linalg.eigh((rho_a + rho_a.conj().T) / 2.0)
    lam = np.clip(lam, 0.0, None)
    sqrt_a = (vecs * np.sqrt(lam)) @ vecs.conj().T
    inner = sqrt_a @ rho_b @ sqrt_a
    mu = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    return float(np.sum(np.sqrt(np.clip(mu, 0.0, None))))


def qfi_fidelity(rho_g: np.ndarray, rho_g_plus: np.ndarray, dg: float) -> float:
    """QFI from the fidelity drop between states at g and g + dg.

    Implements 8 * (1 - fidelity) / dg**2.  The 1/dg**2 normalization
    follows from the Bures expansion fidelity ~ 1 - F * dg^2 / 8; without
    it the finite-difference limit would vanish instead of converging to
    the QFI.
    """
    if dg <= 0:
        raise ValueError(f"dg must be positive, got {dg!r}")
    return 8.0 * (1.0 - fidelity(rho_g, rho_g_plus)) / dg**2


def cramer_rao(qfi: float, n_measurements: int) -> float:
    """Uncertainty floor 1/sqrt(M * F) for M repeated measurements.

    A zero QFI carries no information; that case returns ``math.inf``
    rather than raising.
    """
    if qfi < 0:
        raise ValueError(f"qfi must be nonnegative, got {qfi!r}")
    if n_measurements < 1 or int(n_measurements) != n_measurements:
        raise ValueError(f"n_measurements must be a positive integer, got {n_measurements!r}")
    if qfi == 0:
        return math.inf
    return 1.0 / math.sqrt(n_measurements * qfi)


def bounds(n_spins: int, t: float) -> BoundReport:
    """Reference values N*t, N*t^2 and N^2*t^2 for normalizing results."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    n = float(n_spins)
    return BoundReport(classical=n * t, coherent=n * t**2, heisenberg=n**2 * t**2)
