"""Joint integration of the collective-spin master equation and its
field-derivative companion.

The state of one run is the pair (rho, drho/dg).  Both evolve under the
same collective Liouvillian; the derivative additionally picks up the AC
commutator sourced by rho, which is what makes the g -> 0 limit an exact
linear-response computation rather than a finite difference.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .integrator import IntegrationFailure, integrate_adaptive
from .qfi import _qfi_from_eigh
from .spin_ops import SpinOperators, build_spin_operators, polarized_up_state, expectation

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is optional
    njit = None

ENTROPY_EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters of one run.

    Frequencies are quoted in units of the decay rate kappa (kappa = 1 sets
    the time unit).  ``omega_ac`` and ``phi`` may be left None and filled
    later from the resonance defaults; ``t_max`` defaults to
    ``t_max_factor * n_spins / kappa`` so the window grows with the peak
    time.  ``g = 0`` is the exact linear-response setting; finite g is kept
    for validation against finite differences.  ``ac_on = False`` removes
    the drive from both equations (no information is encoded at all).
    """

    n_spins: int
    omega0: float
    kappa: float = 1.0
    g: float = 0.0
    omega_ac: float | None = None
    phi: float | None = None
    t_max: float | None = None
    n_out: int = 2000
    rtol: float = 1e-8
    atol: float = 1e-10
    ac_on: bool = True
    t_max_factor: float = 0.5

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 1:
            raise ValueError(f"n_spins must be a positive integer, got {self.n_spins!r}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa!r}")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max!r}")
        if self.n_out < 2:
            raise ValueError(f"n_out must be at least 2, got {self.n_out!r}")
        if self.rtol < 0 or self.atol < 0 or self.rtol + self.atol == 0:
            raise ValueError("tolerances must be nonnegative and not both zero")
        if self.t_max_factor <= 0:
            raise ValueError(f"t_max_factor must be positive, got {self.t_max_factor!r}")

    def resolve(self) -> "SimParams":
        """Concrete copy with t_max filled in and the AC field pinned down."""
        t_max = self.t_max
        if t_max is None:
            if self.kappa == 0:
                raise ValueError("t_max must be given explicitly when kappa == 0")
            t_max = self.t_max_factor * self.n_spins / self.kappa
        omega_ac, phi = self.omega_ac, self.phi
        if self.ac_on:
            if omega_ac is None or phi is None:
                raise ValueError(
                    "omega_ac and phi must be set (use resonance_defaults) "
                    "when the AC drive is on"
                )
        else:
            omega_ac = 0.0 if omega_ac is None else omega_ac
            phi = 0.0 if phi is None else phi
        return dataclasses.replace(self, t_max=t_max, omega_ac=omega_ac, phi=phi)


@dataclass
class JointState:
    """Density matrix and its derivative with respect to the field strength."""

    rho: np.ndarray
    drho_dg: np.ndarray


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    qfi: float
    sy: float
    sz: float
    var_sz: float
    entropy: float
    purity: float


@dataclass
class Trajectory:
    """Observables sampled on the output grid of one integration."""

    params: SimParams
    records: list[ObservableRecord]
    n_steps: int = 0
    n_rejected: int = 0
    states: list[JointState] | None = None

    def _column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def times(self) -> np.ndarray:
        return self._column("t")

    @property
    def qfi(self) -> np.ndarray:
        return self._column("qfi")

    @property
    def sy(self) -> np.ndarray:
        return self._column("sy")

    @property
    def sz(self) -> np.ndarray:
        return self._column("sz")

    @property
    def var_sz(self) -> np.ndarray:
        return self._column("var_sz")

    @property
    def entropy(self) -> np.ndarray:
        return self._column("entropy")

    @property
    def purity(self) -> np.ndarray:
        return self._column("purity")


def btc_liouvillian_apply(
    params: SimParams, ops: SpinOperators, rho: np.ndarray
) -> np.ndarray:
    """Collective Liouvillian acting on a matrix.

    Returns -i*omega0 [S^x, rho] + (kappa/(N/2)) (S^- rho S^+
    - {S^+ S^-, rho}/2).  Trace-free and Hermiticity-preserving; also
    applied to drho/dg, which need not be a state.
    """
    if rho.shape != (ops.dimension, ops.dimension):
        raise ValueError(
            f"dimension mismatch: rho {rho.shape} vs operators "
            f"({ops.dimension}, {ops.dimension})"
        )
    out = np.zeros_like(rho, dtype=complex)
    if params.omega0 != 0.0:
        out += -1j * params.omega0 * (ops.sx @ rho - rho @ ops.sx)
    if params.kappa != 0.0:
        rate = params.kappa / ops.total_spin
        k = ops.s_plus @ ops.s_minus
        out += rate * (
            ops.s_minus @ rho @ ops.s_plus - 0.5 * (k @ rho + rho @ k)
        )
    return out


def ac_term_apply(
    t: float, params: SimParams, ops: SpinOperators, x: np.ndarray
) -> np.ndarray:
    """AC commutator -i sin(omega_ac t + phi) [S^z, x].

    The field strength g is deliberately not applied here; the joint
    right-hand side attaches it where each equation needs it.
    """
    if x.shape != (ops.dimension, ops.dimension):
        raise ValueError(
            f"dimension mismatch: x {x.shape} vs operators "
            f"({ops.dimension}, {ops.dimension})"
        )
    amp = -1j * np.sin(params.omega_ac * t + params.phi)
    return amp * (ops.sz @ x - x @ ops.sz)


def joint_rhs(
    t: float, y: JointState, params: SimParams, ops: SpinOperators
) -> JointState:
    """Time derivative of (rho, drho/dg).

    d(rho)/dt     = L[rho] + g * A(t)[rho]
    d(drho/dg)/dt = L[drho/dg] + A(t)[rho + g * drho/dg]

    with L the collective Liouvillian and A(t) the AC commutator.  At
    g = 0 this is the exact linear-response system.  This is the reference
    formulation; ``integrate`` uses a banded fast path checked against it.
    """
    drho_dt = btc_liouvillian_apply(params, ops, y.rho)
    ddrho_dt = btc_liouvillian_apply(params, ops, y.drho_dg)
    if params.ac_on:
        if params.g != 0.0:
            drho_dt = drho_dt + params.g * ac_term_apply(t, params, ops, y.rho)
            ddrho_dt = ddrho_dt + ac_term_apply(
                t, params, ops, y.rho + params.g * y.drho_dg
            )
        else:
            ddrho_dt = ddrho_dt + ac_term_apply(t, params, ops, y.rho)
    return JointState(rho=drho_dt, drho_dg=ddrho_dt)


if njit is not None:

    @njit(
        "void(complex128[:,:,::1], complex128[:,:,::1], float64[::1], "
        "float64[::1], float64, float64, float64, float64)",
        cache=True,
        nogil=True,
        fastmath=True,
    )
    def _joint_rhs_kernel(y, out, kd, s, rate, w0, sinval, g):  # pragma: no cover
        # Single fused pass over both matrices; algebra identical to the
        # banded numpy path below (which is what the tests exercise).
        # Both inputs are Hermitian along the integration (real-coefficient
        # stage combinations of Hermitian matrices), so only the upper
        # triangle is computed and the rest mirrored.
        dim = y.shape[1]
        amp = -1j * sinval
        for j in range(dim):
            sj = s[j] if j + 1 < dim else 0.0
            sjm = s[j - 1] if j >= 1 else 0.0
            kdj = kd[j]
            for k in range(j, dim):
                gd = -0.5 * rate * (kdj + kd[k])
                y0 = y[0, j, k]
                y1 = y[1, j, k]
                row0 = row1 = col0 = col1 = 0.0 + 0.0j
                if j + 1 < dim:
                    row0 = sj * y[0, j + 1, k]
                    row1 = sj * y[1, j + 1, k]
                if j >= 1:
                    row0 += sjm * y[0, j - 1, k]
                    row1 += sjm * y[1, j - 1, k]
                if k >= 1:
                    col0 = s[k - 1] * y[0, j, k - 1]
                    col1 = s[k - 1] * y[1, j, k - 1]
                if k + 1 < dim:
                    col0 += s[k] * y[0, j, k + 1]
                    col1 += s[k] * y[1, j, k + 1]
                l0 = gd * y0 + (0.5j * w0) * (col0 - row0)
                l1 = gd * y1 + (0.5j * w0) * (col1 - row1)
                if j >= 1 and k >= 1:
                    diss = rate * sjm * s[k - 1]
                    l0 += diss * y[0, j - 1, k - 1]
                    l1 += diss * y[1, j - 1, k - 1]
                ac = amp * (k - j)
                v0 = l0 + (g * ac) * y0
                v1 = l1 + ac * (y0 + g * y1)
                out[0, j, k] = v0
                out[1, j, k] = v1
                if k > j:
                    out[0, k, j] = v0.conjugate()
                    out[1, k, j] = v1.conjugate()

else:  # pragma: no cover - numba is optional
    _joint_rhs_kernel = None


class _FastJointRhs:
    """Banded evaluation of the joint right-hand side on a (2, D, D) stack.

    S^z is diagonal and S^+/S^- are bidiagonal in the Dicke basis, so with
    G = -i*omega0*S^x - (kappa/2S) S^+S^- the Liouvillian is
    G y + y G^dag + rate * (S^- y S^+), and every term reduces to shifted
    row/column scalings: O(D^2) per call instead of dense matrix products.
    Behaviorally identical to ``joint_rhs``; writes into ``out``.
    """

    def __init__(self, params: SimParams, ops: SpinOperators, use_kernel: bool = True):
        self.params = params
        s = ops.lowering_amps
        kdiag = np.concatenate([s * s, [0.0]])
        rate = params.kappa / ops.total_spin
        gd = -0.5 * rate * kdiag
        # combined diagonal coefficient gd_j + conj(gd_k) (real here)
        self.gd2 = (gd[:, None] + gd[None, :]).astype(complex)
        gc = -0.5j * params.omega0 * s
        self.gc_col = gc[:, None]
        self.gcc_row = np.conj(gc)
        self.rss = rate * np.outer(s, s)
        self.dz = ops.m_values[:, None] - ops.m_values[None, :]
        self.scr = np.empty((ops.dimension, ops.dimension), dtype=complex)
        self.s = np.ascontiguousarray(s)
        self.kdiag = np.ascontiguousarray(kdiag)
        self.rate = rate
        self.use_kernel = use_kernel and _joint_rhs_kernel is not None

    def __call__(self, t: float, y: np.ndarray, out: np.ndarray) -> np.ndarray:
        p = self.params
        if self.use_kernel and y.flags.c_contiguous and out.flags.c_contiguous:
            sinval = np.sin(p.omega_ac * t + p.phi) if p.ac_on else 0.0
            _joint_rhs_kernel(
                y, out, self.kdiag, self.s, self.rate, p.omega0, float(sinval), p.g
            )
            return out
        np.multiply(self.gd2, y, out=out)
        if p.omega0 != 0.0:
            out[:, :-1, :] += self.gc_col * y[:, 1:, :]
            out[:, 1:, :] += self.gc_col * y[:, :-1, :]
            out[:, :, 1:] += self.gcc_row * y[:, :, :-1]
            out[:, :, :-1] += self.gcc_row * y[:, :, 1:]
        if p.kappa != 0.0:
            out[:, 1:, 1:] += self.rss * y[:, :-1, :-1]
        if p.ac_on:
            amp = -1j * np.sin(p.omega_ac * t + p.phi)
            scr = self.scr
            if p.g != 0.0:
                np.multiply(self.dz, y[0], out=scr)
                scr *= p.g * amp
                out[0] += scr
                np.multiply(self.dz, y[1], out=scr)
                scr *= p.g
                scr += self.dz * y[0]
                scr *= amp
                out[1] += scr
            else:
                np.multiply(self.dz, y[0], out=scr)
                scr *= amp
                out[1] += scr
        return out


def observables(
    rho: np.ndarray, drho: np.ndarray, ops: SpinOperators, t: float
) -> ObservableRecord:
    """One sampled record: QFI plus the magnetization diagnostics.

    Entropy comes from the eigenvalues of rho (clamped below 1e-14), the
    QFI from the same eigendecomposition, purity from Tr rho^2, and the
    variance of S^z is clamped at zero against round-off.
    """
    m = ops.m_values
    diag = np.real(np.diagonal(rho))
    sz_val = float(m @ diag)
    var_sz = float((m * m) @ diag) - sz_val**2
    var_sz = max(var_sz, 0.0)
    sy_val = expectation(ops.sy, rho).real

    lam, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    pos = lam[lam > ENTROPY_EIG_FLOOR]
    entropy = max(0.0, float(-np.sum(pos * np.log(pos))))
    purity = float(np.sum(np.abs(rho) ** 2))
    qfi_val, _ = _qfi_from_eigh(lam, vecs, drho)
    return ObservableRecord(
        t=float(t),
        qfi=qfi_val,
        sy=sy_val,
        sz=sz_val,
        var_sz=var_sz,
        entropy=entropy,
        purity=purity,
    )


def integrate(
    params: SimParams,
    rho0: np.ndarray | None = None,
    store_states: bool = False,
) -> Trajectory:
    """Run one joint integration and sample observables on a uniform grid.

    Starts from (polarized-up, 0) at t = 0 unless ``rho0`` overrides the
    initial density matrix.  Both matrices are re-Hermitized after every
    accepted step; positivity is *not* projected, so eigenvalue dips beyond
    tolerance indicate the step control needs tightening rather than
    masking.

    Raises
    ------
    IntegrationFailure
        On step-size underflow, carrying the last good time.
    """
    params = params.resolve()
    ops = build_spin_operators(params.n_spins)
    dim = ops.dimension
    y0 = np.zeros((2, dim, dim), dtype=complex)
    if rho0 is None:
        y0[0] = polarized_up_state(params.n_spins)
    else:
        if rho0.shape != (dim, dim):
            raise ValueError(f"rho0 shape {rho0.shape} does not match dimension {dim}")
        y0[0] = rho0

    t_eval = np.linspace(0.0, params.t_max, params.n_out)
    records: list[ObservableRecord] = []
    states: list[JointState] | None = [] if store_states else None

    def on_sample(t, y):
        records.append(observables(y[0], y[1], ops, t))
        if states is not None:
            states.append(JointState(rho=y[0].copy(), drho_dg=y[1].copy()))

    def post_accept(y):
        herm = y.conj().transpose(0, 2, 1)
        np.add(y, herm, out=y)
        y *= 0.5

    try:
        stats = integrate_adaptive(
            _FastJointRhs(params, ops),
            (0.0, params.t_max),
            y0,
            rtol=params.rtol,
            atol=params.atol,
            t_eval=t_eval,
            on_sample=on_sample,
            post_accept=post_accept,
            block_axis=True,
        )
    except IntegrationFailure as exc:
        # hand the samples collected so far to the caller for flagging
        exc.partial_trajectory = Trajectory(params=params, records=records, states=states)
        raise
    return Trajectory(
        params=params,
        records=records,
        n_steps=stats["n_steps"],
        n_rejected=stats["n_rejected"],
        states=states,
    )
