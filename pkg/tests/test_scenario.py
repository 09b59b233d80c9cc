import numpy as np
import pytest

from vne_bdt.constants import SQRT5, TRACE_RHO0
from vne_bdt.linalg import eigvals_hermitian, hermiticity_defect
from vne_bdt.scenario import (
    NORM,
    ParameterError,
    ScenarioParams,
    envelopes,
    h1_block_eigenvalues,
    h1_closed,
    rho1_closed,
    rho1_spectrum,
    rho_int_limits,
    scenario_init,
)

P = ScenarioParams()


def block(p, m):
    return m[p.n_k:p.n_k + 3, p.n_k:p.n_k + 3]


def test_seed_state():
    init = scenario_init(P)
    assert np.trace(init.rho0).real == pytest.approx(TRACE_RHO0)
    assert TRACE_RHO0 == pytest.approx((15 + SQRT5) / 2)
    assert init.omega0 == pytest.approx(10 / (15 + SQRT5))


@pytest.mark.parametrize("alpha", [0.0, 1.0, 5.0, -3.0, 100.0])
def test_initial_vectors_are_unit(alpha):
    init = scenario_init(P.replace(alpha=alpha))
    assert np.linalg.norm(init.psi0) == pytest.approx(1.0)
    assert np.linalg.norm(init.psi0_literal) == pytest.approx(1.0)


def test_initial_vector_without_scattering():
    init = scenario_init(P.replace(alpha=0.0))
    e = np.zeros(P.dim)
    e[P.n_k + 1] = 1.0
    assert np.allclose(init.psi0, e) and np.allclose(init.psi0_literal, e)


def test_envelopes_at_origin():
    env = envelopes(P.replace(alpha=1.0), 0.0)
    assert abs(env.xi) == pytest.approx(np.sqrt(2.0))
    assert env.zeta == pytest.approx(-(5 + 2 * SQRT5 * 1j) / 3)
    assert abs(env.zeta) == pytest.approx(np.sqrt(5.0))


def test_no_scattering_envelopes():
    p = P.replace(alpha=0.0)
    for t in (-30.0, 0.0, 12.5):
        env = envelopes(p, t)
        assert env.xi == 0
        assert env.zeta == pytest.approx(-3 * np.exp(2j * p.omega0 * t))


def test_envelopes_stable_far_out():
    for t in (-1e4, 1e4):
        env = envelopes(P, t)
        assert np.isfinite(env.xi) and np.isfinite(env.zeta)


def test_closed_form_is_a_density_matrix():
    sol = rho1_closed(P)
    for t in np.linspace(-25, 60, 30):
        rho = sol(t)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert hermiticity_defect(rho) < 1e-15
        assert np.allclose(eigvals_hermitian(block(P, rho)), rho1_spectrum(), atol=1e-12)
    assert np.allclose(rho1_spectrum(), np.sort([2, 8, 5 + SQRT5]) / NORM)


def test_derivative_matches_finite_difference():
    sol = rho1_closed(P)
    h = 1e-5
    for t in (-3.0, 4.0, 17.0):
        fd = (sol(t + h) - sol(t - h)) / (2 * h)
        assert np.linalg.norm(fd - sol.derivative(t)) < 1e-8


def test_interaction_picture_limits():
    sol = rho1_closed(P)
    past, future = rho_int_limits()
    big_t = 200 / P.omega0
    assert np.linalg.norm(sol.interaction(-big_t) - past) < 1e-6
    assert np.linalg.norm(sol.interaction(big_t) - future) < 1e-6
    assert past[0, 2] == pytest.approx((-1 - 4 * SQRT5 * 1j) / 3 / NORM)
    assert future[0, 2] == pytest.approx(-3 / NORM)


def test_dimension_independence():
    ts = (-10.0, 0.0, 20.0)
    small = P.replace(dim=P.n_k + 3)
    for t in ts:
        a = block(small, rho1_closed(small)(t))
        b = block(P, rho1_closed(P)(t))
        assert np.allclose(a, b, atol=1e-15)
    with pytest.raises(ParameterError):
        P.replace(dim=P.n_k + 2)


def test_sech_variant_matches_general():
    ps = P.sech_params()
    for t in np.linspace(-40, 40, 17):
        assert np.abs(h1_closed(ps, t, "sech") - h1_closed(ps, t, "general")).max() < 1e-12
    with pytest.raises(ParameterError):
        h1_closed(P, 0.0, "sech")


def test_partner_hermitian_and_block_trace_constant():
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = P.replace(alpha=rng.uniform(-20, 20), c1=rng.normal(), c2=rng.normal())
        traces = []
        for t in rng.uniform(-50, 50, 6):
            for variant in ("general", "detuned"):
                assert hermiticity_defect(h1_closed(p, t, variant)) < 1e-13
            traces.append(np.trace(block(p, h1_closed(p, t))).real)
        assert np.ptp(traces) < 1e-12


def test_detuned_differs_by_identity_on_block():
    p = P.replace(c1=0.3, c2=-0.2)
    diffs = [block(p, h1_closed(p, t) - h1_closed(p, t, "detuned")) for t in (-5.0, 0.0, 9.0)]
    for d in diffs:
        assert np.allclose(d, d[0, 0] * np.eye(3))
    assert np.allclose(diffs[0], diffs[-1])


def test_block_eigenvalue_formula():
    p = P.replace(c1=-(P.k + 1))
    w0 = p.omega0
    t_mid = 5 * np.log(p.alpha) / w0
    assert np.allclose(h1_block_eigenvalues(p, t_mid), np.array([-1, 0, 1]) * w0 / 5 * np.sqrt(26))
    assert np.allclose(h1_block_eigenvalues(p, 1e4), [-w0, 0, w0])
    for t in (-20.0, 0.0, 40.0):
        assert np.allclose(h1_block_eigenvalues(p.replace(alpha=0.0), t), [-w0, 0, w0])
        assert np.allclose(eigvals_hermitian(block(p, h1_closed(p, t))), h1_block_eigenvalues(p, t), atol=1e-9)
    with pytest.raises(ParameterError):
        h1_block_eigenvalues(P, 0.0)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        ScenarioParams(eps=0.0)
    with pytest.raises(ParameterError):
        ScenarioParams(n_k=-1)
    with pytest.raises(ValueError):
        h1_closed(P, 0.0, "bogus")
