"""Collective spin operators and states on the symmetric (maximal-S) sector.

For N spin-1/2 particles the collective operators S^{x,y,z} preserve the
(N+1)-dimensional ladder |S, m> with S = N/2.  Basis convention: index
j = 0..N maps to m = S - j, so index 0 is the fully polarized "up" state
and S^- populates the first subdiagonal.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpinOperators:
    """Dense collective spin-S matrices for N spins (dimension N+1).

    Attributes
    ----------
    n_spins : int
        Number of spin-1/2 particles N.
    dimension : int
        Sector dimension, N + 1.
    m_values : np.ndarray
        Magnetic quantum numbers in basis order, S, S-1, ..., -S.
    lowering_amps : np.ndarray
        Subdiagonal amplitudes of ``s_minus``: entry j is
        sqrt(S(S+1) - m_j(m_j - 1)) with m_j = S - j.
    sx, sy, sz, s_plus, s_minus : np.ndarray
        Complex (N+1)x(N+1) matrices.
    """

    n_spins: int
    dimension: int
    m_values: np.ndarray
    lowering_amps: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray

    @property
    def total_spin(self) -> float:
        return self.n_spins / 2.0


def build_spin_operators(n_spins: int) -> SpinOperators:
    """Construct the collective spin matrices for ``n_spins`` particles.

    The ladder action is S^-|S,m> = sqrt(S(S+1) - m(m-1)) |S,m-1>, and
    sx = (S^+ + S^-)/2, sy = (S^+ - S^-)/(2i).

    Raises
    ------
    ValueError
        If ``n_spins`` is not a positive integer.
    """
    if int(n_spins) != n_spins or n_spins < 1:
        raise ValueError(f"n_spins must be a positive integer, got {n_spins!r}")
    n = int(n_spins)
    dim = n + 1
    s = n / 2.0
    m = s - np.arange(dim, dtype=float)
    # amplitude for m_j -> m_j - 1, j = 0..dim-2
    amps = np.sqrt(s * (s + 1.0) - m[:-1] * (m[:-1] - 1.0))

    s_minus = np.zeros((dim, dim), dtype=complex)
    s_minus[np.arange(1, dim), np.arange(dim - 1)] = amps
    s_plus = s_minus.conj().T
    sx = (s_plus + s_minus) / 2.0
    sy = (s_plus - s_minus) / 2.0j
    sz = np.diag(m).astype(complex)

    return SpinOperators(
        n_spins=n,
        dimension=dim,
        m_values=m,
        lowering_amps=amps,
        sx=sx,
        sy=sy,
        sz=sz,
        s_plus=s_plus,
        s_minus=s_minus,
    )


def polarized_up_state(n_spins: int) -> np.ndarray:
    """Density matrix of the pure |S, S><S, S| state (all spins up).

    Under the basis convention this is a single 1 at entry (0, 0); it has
    <S^z> = N/2.
    """
    if int(n_spins) != n_spins or n_spins < 1:
        raise ValueError(f"n_spins must be a positive integer, got {n_spins!r}")
    rho = np.zeros((int(n_spins) + 1, int(n_spins) + 1), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """Tr(op @ rho) without forming the product matrix.

    Returns the complex trace; take ``.real`` for Hermitian observables.
    """
    if op.shape != rho.shape or op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(
            f"dimension mismatch: op {op.shape} vs rho {rho.shape}"
        )
    return complex(np.einsum("ij,ji->", op, rho))


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    eig_floor: float = -1e-9,
) -> None:
    """Raise ValueError unless ``rho`` is Hermitian, unit-trace and PSD.

    Eigenvalues are allowed to dip to ``eig_floor`` below zero to absorb
    round-off from integration.
    """
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > herm_tol:
        raise ValueError(f"density matrix not Hermitian: max deviation {herm_err:g}")
    tr_err = abs(np.trace(rho) - 1.0)
    if tr_err > trace_tol:
        raise ValueError(f"density matrix trace deviates from 1 by {tr_err:g}")
    min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0])
    if min_eig < eig_floor:
        raise ValueError(f"density matrix has eigenvalue {min_eig:g} below {eig_floor:g}")
