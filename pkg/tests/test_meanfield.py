import numpy as np
import pytest

from btcsense.dynamics import SimParams
from btcsense.meanfield import mf_integrate, mf_qfi_series, mf_reduced_state, mf_rhs

RES = dict(omega_ac=np.sqrt(15.0), phi=np.arcsin(0.25))


def test_rhs_drive_vanishes_at_zero_sin():
    p = SimParams(n_spins=8, omega0=4.0, g=0.3, omega_ac=2.0, phi=0.0)
    b = np.array([1.0, -2.0, 3.0])
    with_drive = mf_rhs(0.0, b, p)  # sin(0) = 0
    p0 = SimParams(n_spins=8, omega0=4.0, g=0.0, omega_ac=2.0, phi=0.0)
    assert np.allclose(with_drive, mf_rhs(0.0, b, p0))


def test_rhs_fixed_point_below_threshold():
    # (0, omega0 S / kappa, -S sqrt(1 - omega0^2/kappa^2)) is stationary
    p = SimParams(n_spins=12, omega0=0.6, kappa=1.0, ac_on=False)
    s = 6.0
    fp = np.array([0.0, 0.6 * s, -s * np.sqrt(1.0 - 0.36)])
    assert np.max(np.abs(mf_rhs(0.0, fp, p))) < 1e-12


def test_rhs_conserves_bloch_norm_algebraically():
    rng = np.random.default_rng(8)
    p = SimParams(n_spins=10, omega0=3.0, kappa=1.2, g=0.2, omega_ac=2.5, phi=0.7)
    for t in (0.0, 0.3, 1.7):
        b = rng.normal(size=3) * 5.0
        assert abs(b @ mf_rhs(t, b, p)) < 1e-10 * (b @ b)


@pytest.mark.parametrize(
    "kw,g",
    [
        (dict(omega0=4.0, **RES), 0.0),
        (dict(omega0=4.0, **RES), 0.05),
        (dict(omega0=0.7, kappa=1.0, omega_ac=1.3, phi=0.4), 0.1),
    ],
)
def test_integrate_norm_conserved(kw, g):
    # conservation is an invariant of the flow; the integration error budget
    # must sit below the 1e-8 target, hence the tightened tolerances
    p = SimParams(n_spins=64, t_max=40.0, n_out=400, rtol=1e-11, atol=1e-13, **kw)
    traj = mf_integrate(p, g)
    norms = np.linalg.norm(traj.states, axis=1)
    assert np.max(np.abs(norms / 32.0 - 1.0)) < 1e-8


def test_integrate_converges_to_fixed_point():
    p = SimParams(n_spins=6, omega0=0.5, kappa=1.0, ac_on=False,
                  t_max=50.0, n_out=100)
    traj = mf_integrate(p, 0.0)
    s = 3.0
    fp = np.array([0.0, 0.5 * s, -s * np.sqrt(0.75)])
    assert np.linalg.norm(traj.states[-1] - fp) < 1e-6


def test_integrate_oscillation_frequency_matches_internal():
    # late-time sz peak spacing approaches 2 pi / sqrt(omega0^2 - kappa^2)
    p = SimParams(n_spins=32, omega0=4.0, t_max=60.0, n_out=6000, **RES)
    traj = mf_integrate(p, 0.0)
    t, sz = traj.times, traj.states[:, 2]
    peaks = np.flatnonzero((sz[1:-1] > sz[:-2]) & (sz[1:-1] > sz[2:])) + 1
    late = peaks[t[peaks] > 30.0]
    spacing = np.mean(np.diff(t[late]))
    assert spacing == pytest.approx(2.0 * np.pi / np.sqrt(15.0), rel=2e-3)


def test_reduced_state_examples():
    n = 8
    assert np.allclose(mf_reduced_state(np.array([0.0, 0.0, n / 2.0]), n),
                       np.diag([1.0, 0.0]))
    assert np.allclose(mf_reduced_state(np.zeros(3), n), np.eye(2) / 2.0)
    got = mf_reduced_state(np.array([n / 4.0, 0.0, 0.0]), n)
    assert np.allclose(got, np.array([[0.5, 0.25], [0.25, 0.5]]))


def test_reduced_state_valid_density_matrix_on_sphere():
    rng = np.random.default_rng(9)
    n = 10
    for _ in range(10):
        b = rng.normal(size=3)
        b *= (n / 2.0) * rng.uniform(0, 1) / np.linalg.norm(b)
        eig = np.linalg.eigvalsh(mf_reduced_state(b, n))
        assert eig[0] > -1e-12 and eig[-1] < 1.0 + 1e-12


def test_reduced_state_rejects_unphysical():
    with pytest.raises(ValueError, match="exceeds"):
        mf_reduced_state(np.array([5.0, 0.0, 0.0]), 8)


def test_qfi_series_zero_at_t0_and_additive_in_n():
    # atol=0 makes the error control scale-covariant, so doubling N scales
    # the whole Bloch trajectory exactly and additivity is exact
    base = dict(omega0=4.0, t_max=5.0, n_out=51, atol=0.0, **RES)
    series_8 = mf_qfi_series(SimParams(n_spins=8, **base), dg=0.01)
    series_16 = mf_qfi_series(SimParams(n_spins=16, **base), dg=0.01)
    assert series_8[0, 1] == pytest.approx(0.0, abs=1e-9)
    late = series_8[:, 1] > 1e-6
    ratio = series_16[late, 1] / series_8[late, 1]
    assert np.max(np.abs(ratio - 2.0)) < 1e-6


def test_qfi_series_grows():
    p = SimParams(n_spins=16, omega0=4.0, t_max=12.0, n_out=240, **RES)
    series = mf_qfi_series(p, dg=0.01)
    f = series[:, 1]
    assert f[-1] > 10.0 * np.max(f[: f.size // 4])


def test_qfi_series_rejects_bad_dg():
    p = SimParams(n_spins=4, omega0=4.0, t_max=1.0, **RES)
    with pytest.raises(ValueError, match="dg"):
        mf_qfi_series(p, dg=0.0)
