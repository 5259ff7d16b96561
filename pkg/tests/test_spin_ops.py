import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btcsense.spin_ops import (
    build_spin_operators,
    check_density_matrix,
    expectation,
    polarized_up_state,
)


def test_n2_sz_diagonal():
    ops = build_spin_operators(2)
    assert np.allclose(ops.sz, np.diag([1.0, 0.0, -1.0]))
    assert np.max(np.abs(ops.sz.imag)) == 0.0


def test_n2_s_minus_subdiagonal_sqrt2():
    ops = build_spin_operators(2)
    expected = np.zeros((3, 3))
    expected[1, 0] = expected[2, 1] = np.sqrt(2.0)
    assert np.allclose(ops.s_minus, expected)
    # only the first subdiagonal is populated
    assert np.count_nonzero(ops.s_minus) == 2


def test_n1_sx_is_half_pauli():
    ops = build_spin_operators(1)
    assert np.allclose(ops.sx, np.array([[0.0, 0.5], [0.5, 0.0]]))


def test_s_plus_is_adjoint_of_s_minus():
    ops = build_spin_operators(7)
    assert np.array_equal(ops.s_plus, ops.s_minus.conj().T)


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_invalid_n_spins_rejected(bad):
    with pytest.raises(ValueError):
        build_spin_operators(bad)
    with pytest.raises(ValueError):
        polarized_up_state(bad)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=64))
def test_commutator_and_casimir(n):
    ops = build_spin_operators(n)
    s = n / 2.0
    eye = np.eye(n + 1)
    comm = ops.sx @ ops.sy - ops.sy @ ops.sx
    assert np.max(np.abs(comm - 1j * ops.sz)) < 1e-12
    casimir = ops.sx @ ops.sx + ops.sy @ ops.sy + ops.sz @ ops.sz
    assert np.max(np.abs(casimir - s * (s + 1.0) * eye)) < 1e-12


@given(st.integers(min_value=1, max_value=64))
def test_top_state_annihilated_by_raising(n):
    ops = build_spin_operators(n)
    top = np.zeros(n + 1)
    top[0] = 1.0
    assert np.max(np.abs(ops.s_plus @ top)) == 0.0


def test_ladder_action_matches_formula():
    n = 5
    ops = build_spin_operators(n)
    s = n / 2.0
    for j in range(n):
        m = s - j
        amp = np.sqrt(s * (s + 1.0) - m * (m - 1.0))
        vec = np.zeros(n + 1)
        vec[j] = 1.0
        lowered = ops.s_minus @ vec
        assert lowered[j + 1] == pytest.approx(amp, abs=1e-14)


def test_polarized_up_examples():
    rho4 = polarized_up_state(4)
    assert rho4.shape == (5, 5)
    assert rho4[0, 0] == 1.0
    assert np.count_nonzero(rho4) == 1
    assert np.allclose(polarized_up_state(1), np.diag([1.0, 0.0]))


@given(st.integers(min_value=1, max_value=40))
def test_polarized_up_has_sz_half_n(n):
    ops = build_spin_operators(n)
    val = expectation(ops.sz, polarized_up_state(n))
    assert val.real == pytest.approx(n / 2.0, abs=1e-12)
    assert val.imag == pytest.approx(0.0, abs=1e-14)


def test_expectation_examples():
    ops = build_spin_operators(8)
    rho = polarized_up_state(8)
    assert expectation(ops.sz, rho).real == pytest.approx(4.0)
    assert expectation(np.eye(9, dtype=complex), rho).real == pytest.approx(1.0)
    ops2 = build_spin_operators(2)
    assert abs(expectation(ops2.sx, polarized_up_state(2))) == pytest.approx(0.0)


def test_expectation_dimension_mismatch():
    ops = build_spin_operators(3)
    with pytest.raises(ValueError, match="dimension mismatch"):
        expectation(ops.sz, polarized_up_state(5))


def test_check_density_matrix_accepts_valid():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    check_density_matrix(rho)


def test_check_density_matrix_rejects_bad():
    with pytest.raises(ValueError, match="Hermitian"):
        check_density_matrix(np.array([[1.0, 1.0], [0.0, 0.0]], dtype=complex))
    with pytest.raises(ValueError, match="trace"):
        check_density_matrix(np.eye(2, dtype=complex))
    neg = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ValueError, match="eigenvalue"):
        check_density_matrix(neg)
