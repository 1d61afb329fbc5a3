"""Operator construction and parameter validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrsense import (
    SystemParams,
    annihilation,
    critical_frequency,
    hamiltonian_dispersive,
    hamiltonian_full,
    kron,
    qubit_ops,
)

# Frozen by direct evaluation of sqrt(1.67**2 - 1**2).
CRITICAL_REFERENCE = 1.3374976635493612


def test_annihilation_matrix_elements():
    a = annihilation(5)
    expected = np.zeros((5, 5), dtype=complex)
    for n in range(4):
        expected[n, n + 1] = math.sqrt(n + 1)
    assert np.array_equal(a, expected)


def test_annihilation_commutator():
    a = annihilation(30)
    comm = a @ a.conj().T - a.conj().T @ a
    # [a, a'] = 1 except in the truncation corner
    assert np.allclose(comm[:-1, :-1], np.eye(29), atol=1e-12)


def test_qubit_ops_algebra():
    sm, sp, sz = qubit_ops()
    down = np.array([1.0, 0.0], dtype=complex)
    up = np.array([0.0, 1.0], dtype=complex)
    assert np.array_equal(sm @ up, down)
    assert np.array_equal(sp @ down, up)
    assert np.array_equal(sz, np.diag([-1.0 + 0j, 1.0]))
    assert np.allclose(sp @ sm - sm @ sp, sz)


def test_kron_index_convention():
    # flat index is 2 n + s: photon annihilation keeps s, steps n down
    a = annihilation(4)
    sm, _, _ = qubit_ops()
    comp_a = kron(a, np.eye(2, dtype=complex))
    for n in range(3):
        for s in range(2):
            assert comp_a[2 * n + s, 2 * (n + 1) + s] == pytest.approx(math.sqrt(n + 1))
    comp_sm = kron(np.eye(4, dtype=complex), sm)
    for n in range(4):
        assert comp_sm[2 * n, 2 * n + 1] == 1.0


@settings(max_examples=30, deadline=None)
@given(
    omega=st.floats(-3, 3),
    omega_q=st.floats(-3, 3),
    epsilon=st.floats(0, 3),
    chi=st.floats(-1, 1),
    g=st.floats(-2, 2),
)
def test_full_hamiltonian_hermitian(omega, omega_q, epsilon, chi, g):
    p = SystemParams(omega=omega, omega_q=omega_q, epsilon=epsilon, chi=chi, g=g,
                     gamma=1.0, n_fock=6)
    h = hamiltonian_full(p)
    assert np.allclose(h, h.conj().T, atol=1e-12)


def test_full_pump_matrix_element():
    p = SystemParams(epsilon=1.2, gamma=1.0, n_fock=5)
    h = hamiltonian_full(p)
    for s in range(2):
        assert h[4 + s, s] == pytest.approx(0.5 * 1.2 * math.sqrt(2))


def test_full_coupling_matrix_element():
    # a's- moves |n, up> to |n+1, down> with weight g sqrt(n+1)
    p = SystemParams(omega_q=5.0, g=2.0, gamma=1.0, n_fock=5)
    h = hamiltonian_full(p)
    for n in range(4):
        assert h[2 * (n + 1), 2 * n + 1] == pytest.approx(2.0 * math.sqrt(n + 1))


def test_full_block_diagonal_without_coupling():
    p = SystemParams(omega=0.7, omega_q=4.0, epsilon=1.1, chi=0.3, g=0.0,
                     gamma=1.0, n_fock=6)
    h = hamiltonian_full(p)
    down = h[0::2, 0::2]
    up = h[1::2, 1::2]
    assert np.allclose(h[0::2, 1::2], 0.0)
    assert np.allclose(h[1::2, 0::2], 0.0)
    a = annihilation(6)
    adag = a.conj().T
    resonator = 0.7 * adag @ a + 0.55 * (adag @ adag + a @ a) + 0.3 * (adag @ adag @ a @ a)
    assert np.allclose(down, resonator, atol=1e-12)
    assert np.allclose(up, resonator + 4.0 * np.eye(6), atol=1e-12)


def test_dispersive_branch_frequencies():
    p = SystemParams(omega=0.0, epsilon=0.0, chi=0.0, gamma=1.0,
                     delta_omega=2.3, n_fock=4)
    h_up = hamiltonian_dispersive(p, "up")
    h_down = hamiltonian_dispersive(p, "down")
    assert h_up[1, 1] == pytest.approx(1.15)
    assert h_down[1, 1] == pytest.approx(-1.15)
    with pytest.raises(ValueError):
        hamiltonian_dispersive(p, "sideways")


def test_dispersive_shift_derived_from_coupling():
    omega = 1.0
    p = SystemParams(omega=omega, omega_q=omega + 100.0, g=math.sqrt(230.0),
                     gamma=1.0, n_fock=4)
    assert p.dispersive_shift() == pytest.approx(2.3, rel=1e-12)
    h_up = hamiltonian_dispersive(p, "up")
    assert h_up[1, 1] == pytest.approx(omega + 1.15, rel=1e-12)


def test_critical_frequency_frozen_value():
    assert critical_frequency(1.67, 1.0) == pytest.approx(CRITICAL_REFERENCE, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(gamma=st.floats(0.1, 5), excess=st.floats(0, 10))
def test_critical_frequency_inverts(gamma, excess):
    epsilon = gamma + excess
    wc = critical_frequency(epsilon, gamma)
    assert wc * wc + gamma * gamma == pytest.approx(epsilon * epsilon, rel=1e-12)


def test_critical_frequency_below_threshold_raises():
    with pytest.raises(ValueError):
        critical_frequency(0.5, 1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(gamma=0.0)
    with pytest.raises(ValueError):
        SystemParams(gamma=-1.0)
    with pytest.raises(ValueError):
        SystemParams(epsilon=-0.1)
    with pytest.raises(ValueError):
        SystemParams(n_fock=1)
    with pytest.raises(ValueError):
        SystemParams(omega=float("nan"))
    with pytest.raises(ValueError):
        SystemParams(delta_omega=-2.0)


def test_params_dispersive_consistency():
    # matching pair passes, mismatched pair is rejected
    SystemParams(omega=0.0, omega_q=100.0, g=math.sqrt(230.0), delta_omega=2.3)
    with pytest.raises(ValueError):
        SystemParams(omega=0.0, omega_q=100.0, g=math.sqrt(230.0), delta_omega=2.4)
    with pytest.raises(ValueError):
        SystemParams(omega=1.0, omega_q=1.0, g=2.0, delta_omega=2.3)
    # delta_omega alone or g alone is always fine
    SystemParams(delta_omega=2.3)
    SystemParams(omega=0.0, omega_q=100.0, g=2.0)
