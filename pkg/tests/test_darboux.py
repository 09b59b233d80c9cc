import numpy as np
import pytest

from vne_bdt.constants import SQRT5
from vne_bdt.darboux import (
    DressingError,
    DressingState,
    annihilation_operator,
    dressing_coefficient,
    dressing_operator,
    lax_eigen_residual,
    lax_time_derivative,
    partner_hamiltonian_alt,
    projector,
    rayleigh_z,
    reconstruct_dressed,
    transform_density,
)
from vne_bdt.linalg import eigvals_hermitian, hermiticity_defect, unitarity_defect
from vne_bdt.scenario import ScenarioParams, base_solution, rho1_closed, scenario_init

P = ScenarioParams()
H = P.hamiltonian
INIT = scenario_init(P)
SEED_SPECTRUM = np.array([1.0, (5 + SQRT5) / 2, 4.0])


def test_projector():
    e0 = np.zeros(4)
    e0[0] = 1
    assert np.allclose(projector(e0), np.diag([1, 0, 0, 0]))
    psi = np.random.default_rng(0).normal(size=5) + 1j
    p = projector(psi)
    assert np.allclose(p @ p, p) and np.allclose(p, p.conj().T)
    assert np.trace(projector(INIT.psi0)).real == pytest.approx(1.0)


def test_dressing_operator_forms():
    p = projector(INIT.psi0)
    assert np.allclose(dressing_operator(1j, p), np.eye(16) - 2 * p)
    assert abs(1 + dressing_coefficient(1 + 1j)) == pytest.approx(1.0)
    assert dressing_coefficient(1 + 1j) == pytest.approx(1j - 1)
    assert unitarity_defect(dressing_operator(1 + 1j, p)) < 1e-12
    assert np.allclose(dressing_operator(2j, np.zeros((3, 3))), np.eye(3))
    with pytest.raises(DressingError):
        dressing_coefficient(2.0)


def test_transform_density():
    rho = np.diag([1.0, 2.0, 3.0]).astype(complex)
    assert np.allclose(transform_density(rho, 1j, np.diag([0, 1.0, 0])), rho)
    sigma = transform_density(INIT.rho0, 1j / P.eps, projector(INIT.psi0))
    k = P.n_k
    assert np.allclose(eigvals_hermitian(sigma[k:k + 3, k:k + 3]), SEED_SPECTRUM, atol=1e-12)
    assert np.trace(sigma) == pytest.approx(np.trace(INIT.rho0))


def test_annihilation_operator():
    p = projector(INIT.psi0)
    assert np.linalg.norm(annihilation_operator(1j, 1j, p) @ INIT.psi0) < 1e-14
    assert np.allclose(annihilation_operator(0.3, 1j, np.zeros((2, 2))), np.eye(2))
    lam = 0.7
    a = annihilation_operator(lam, 1j, p)
    assert np.allclose(a, np.eye(16) - (2j / (lam + 1j)) * p)
    with pytest.raises(DressingError):
        annihilation_operator(-1j, 1j, p)


def test_lax_eigenvector_on_basis_state():
    rho = np.diag(np.arange(16.0)).astype(complex)
    psi = np.zeros(16, dtype=complex)
    psi[4] = 1
    omega = 0.3 + 0.2j
    z = rayleigh_z(rho, H, omega, psi)
    assert z == pytest.approx(4.0 - omega * H.diagonal[4])
    assert lax_eigen_residual(rho, H, omega, z, psi) < 1e-15


def test_initial_lax_vector_is_eigenvector():
    mu = 1j / P.eps
    z = rayleigh_z(INIT.rho0, H, mu, INIT.psi0)
    assert lax_eigen_residual(INIT.rho0, H, mu, z, INIT.psi0) < 1e-10
    assert z == pytest.approx((5 + SQRT5) / 2 - 3.5j)
    bumped = INIT.psi0.copy()
    bumped[P.n_k] += 0.1
    assert lax_eigen_residual(INIT.rho0, H, mu, rayleigh_z(INIT.rho0, H, mu, bumped), bumped) > 1e-3


def test_literal_initial_vector_is_not_an_eigenvector():
    mu = 1j / P.eps
    psi = INIT.psi0_literal
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert lax_eigen_residual(INIT.rho0, H, mu, rayleigh_z(INIT.rho0, H, mu, psi), psi) > 0.5


def test_transformed_lax_pair_annihilates_dressed_vector():
    # eigen equation at spectral parameter lam for the dressed state
    mu = 1j
    p = projector(INIT.psi0)
    sigma = transform_density(INIT.rho0, mu, p)
    lam = 0.4 + 2.0j
    a = annihilation_operator(lam, mu, p)
    hm = H.matrix()
    lhs = (sigma - lam * hm) @ a
    rhs = a @ (INIT.rho0 - lam * hm)
    # A intertwines the two Lax operators on the psi-orthogonal complement
    vecs = np.linalg.svd(np.eye(16) - p)[0][:, :15]
    assert np.linalg.norm((lhs - rhs) @ vecs) < 1e-10


def test_alt_partner_hermitian_and_static_case():
    psi = INIT.psi0
    state = DressingState.from_psi(0.0, 1j, psi)
    u = state.U
    static = partner_hamiltonian_alt(state, np.zeros(16), 1.0, H)
    assert np.allclose(static, u @ H.matrix() @ u.conj().T)
    rho = base_solution(P)
    for t in (0.0, 1.3):
        dot = lax_time_derivative(rho(t), H, 1j, psi)
        dot -= np.vdot(psi, dot) * psi  # gauge: keep the norm fixed
        h1 = partner_hamiltonian_alt(DressingState.from_psi(t, 1j, psi), dot, 5.0, H)
        assert hermiticity_defect(h1) < 1e-10


def test_reconstruction_short_window():
    rec = reconstruct_dressed(P, -0.5, 1.0, 1e-3, stride=50)
    sol = rho1_closed(P)
    err = max(np.linalg.norm(v - sol(t)) for t, v in zip(rec.rescaled.t, rec.rescaled.values))
    assert err < 1e-8
    k = P.n_k
    for s in rec.sigma.values[::5]:
        assert np.allclose(eigvals_hermitian(s[k:k + 3, k:k + 3]), SEED_SPECTRUM, atol=1e-9)
    with pytest.raises(ValueError):
        reconstruct_dressed(P, 0.5, 1.0)
