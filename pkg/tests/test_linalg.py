import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vne_bdt.constants import SQRT5, TRACE_RHO0
from vne_bdt.linalg import (
    DimensionError,
    NotHermitianError,
    NotUnitaryError,
    NumberHamiltonian,
    bracket,
    conjugate_unitary,
    density_check,
    eig_hermitian,
    eigvals_hermitian,
    phase_evolution,
    trace_moment,
)
from vne_bdt.scenario import ScenarioParams, rho0_block, scenario_init


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_number_hamiltonian_levels():
    h = NumberHamiltonian(eps=2.0, r=0.5, dim=5)
    assert np.allclose(h.levels, [0.5, 1.5, 2.5, 3.5, 4.5])
    assert np.allclose(h.matrix(), np.diag([1.0, 3.0, 5.0, 7.0, 9.0]))


def test_bracket_identity_commutes():
    a = random_hermitian(np.random.default_rng(0), 5)
    assert np.abs(bracket(np.eye(5), a)).max() == 0


def test_bracket_diagonal_on_matrix_unit():
    n = np.diag(np.arange(5.0))
    e = np.zeros((5, 5))
    e[3, 1] = 1.0
    assert np.allclose(bracket(n, e), 2.0 * e)


def test_bracket_square_of_seed_state():
    p = ScenarioParams()
    h = p.hamiltonian.matrix()
    rho0 = scenario_init(p).rho0
    assert np.allclose(bracket(h, rho0 @ rho0), 5 * bracket(h, rho0), atol=1e-13)


def test_bracket_rejects_bad_input():
    with pytest.raises(DimensionError):
        bracket(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        bracket(np.eye(2), np.eye(2), "jordan")


def test_conjugate_identity_and_invariants():
    rng = np.random.default_rng(1)
    a = random_hermitian(rng, 6)
    assert np.allclose(conjugate_unitary(np.eye(6), a), a)
    u = random_unitary(rng, 6)
    b = conjugate_unitary(u, a)
    assert abs(np.trace(b) - np.trace(a)) < 1e-12
    assert np.allclose(np.linalg.eigvalsh(b), np.linalg.eigvalsh(a), atol=1e-12)
    with pytest.raises(NotUnitaryError):
        conjugate_unitary(2 * u, a)


def test_trace_moment_values():
    n = np.diag([0.0, 1.0, 2.0])
    p = np.array([0.2, 0.3, 0.5])
    assert trace_moment(n, np.diag(p), 1) == pytest.approx(1.3)
    h = NumberHamiltonian(eps=1.0, r=0.5, dim=5, block_start=2)
    rho = np.zeros((5, 5), dtype=complex)
    rho[2:5, 2:5] = rho0_block()
    k = 2.5
    assert trace_moment(h.matrix(), rho, 1).real == pytest.approx(TRACE_RHO0 * (k + 1))
    with pytest.raises(ValueError):
        trace_moment(n, np.diag(p), 0)


@pytest.mark.parametrize(
    "a, expected",
    [
        (np.diag([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0]),
        (np.array([[0.0, 1.0], [1.0, 0.0]]), [-1.0, 1.0]),
        (rho0_block(), [1.0, (5 + SQRT5) / 2, 4.0]),
    ],
)
def test_eigvals_small(a, expected):
    assert np.allclose(eigvals_hermitian(a), expected, atol=1e-13)


def test_eig_vectors_diagonalize():
    a = random_hermitian(np.random.default_rng(2), 8)
    vals, vecs = eig_hermitian(a)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(8), atol=1e-12)
    assert np.allclose(a @ vecs, vecs * vals, atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    a = random_hermitian(np.random.default_rng(seed), n)
    assert np.allclose(eigvals_hermitian(a), np.linalg.eigvalsh(a), atol=1e-11)


def test_phase_evolution():
    h = NumberHamiltonian(dim=6)
    assert np.allclose(phase_evolution(h, 5.0, 0.0), np.eye(6))
    w = phase_evolution(h, 3.0, 1.7)
    assert np.allclose(np.abs(np.diag(w)), 1.0)


def test_seed_coherence_rotates_at_ten_eps():
    p = ScenarioParams(eps=1.3)
    h = p.hamiltonian
    rho0 = scenario_init(p).rho0
    t = 0.37
    w = phase_evolution(h, 5.0, t)
    rho = w @ rho0 @ w.conj().T
    k = p.n_k
    assert rho[k, k + 2] == pytest.approx(-1.5 * np.exp(10j * p.eps * t))


def test_density_check():
    p = ScenarioParams()
    rho0 = scenario_init(p).rho0
    rep = density_check(rho0 / TRACE_RHO0)
    assert rep.hermitian and rep.psd and rep.trace_one
    assert not density_check(rho0).trace_one
    zero = density_check(np.zeros((3, 3)))
    assert zero.psd and not zero.trace_one
