"""Closed forms of the harmonic-oscillator example.

Everything is embedded in a ``dim``-dimensional truncated number basis; the
three-level block occupies Fock indices n_k, n_k+1, n_k+2 whose level labels
are k, k+1, k+2 with k = r + n_k.
"""

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .constants import SQRT5
from .dynamics import Evolution, conjugation_solution
from .linalg import NumberHamiltonian

VARIANTS = ("general", "sech", "detuned")

NORM = 15.0 + SQRT5
# amplitude of xi(t): (2 + 3i - sqrt5 i) sqrt(3 + sqrt5) / sqrt3
XI_AMPLITUDE = (2 + 3j - SQRT5 * 1j) * np.sqrt(3 + SQRT5) / np.sqrt(3.0)
# pulse area constant d of the sech form
SECH_D = np.sqrt(3 + SQRT5) * (2 + 3j - SQRT5 * 1j) / (2 * np.sqrt(3.0))
ZETA_PAST = 1 + 4 * SQRT5 * 1j
# weights of the literal psi_i(0) on |k> and |k+2>
PSI_A = np.sqrt((3 + SQRT5) / 6)
PSI_B = np.sqrt(2 / (9 + 3 * SQRT5))


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioParams:
    eps: float = 1.0
    r: float = 0.5
    n_k: int = 2
    alpha: float = 5.0
    c1: float = 0.0
    c2: float = 0.0
    dim: int = 16

    def __post_init__(self):
        if not self.eps > 0:
            raise ParameterError("eps must be positive")
        if self.n_k < 0 or int(self.n_k) != self.n_k:
            raise ParameterError("n_k must be a non-negative integer")
        if self.dim < self.n_k + 3:
            raise ParameterError(f"dim={self.dim} cannot hold the block at n_k={self.n_k}")

    @property
    def k(self) -> float:
        """Level label of the lowest block state."""
        return self.r + self.n_k

    @property
    def omega0(self) -> float:
        return 10.0 * self.eps / NORM

    @property
    def hamiltonian(self) -> NumberHamiltonian:
        return NumberHamiltonian(self.eps, self.r, self.dim, self.n_k)

    def replace(self, **changes) -> "ScenarioParams":
        return ScenarioParams(**{**asdict(self), **changes})

    def sech_params(self) -> "ScenarioParams":
        """Parameters singling out the sech pulse: alpha=1, c1=-(k+1), eps*c2=-omega0*c1."""
        c1 = -(self.k + 1)
        return self.replace(alpha=1.0, c1=c1, c2=-self.omega0 * c1 / self.eps)


class ScenarioInit(NamedTuple):
    rho0: np.ndarray
    psi0: np.ndarray
    omega0: float
    psi0_literal: np.ndarray


def _embed(params: ScenarioParams, block: np.ndarray) -> np.ndarray:
    out = np.zeros((params.dim, params.dim), dtype=complex)
    s = slice(params.n_k, params.n_k + 3)
    out[s, s] = block
    return out


def _embed_vector(params: ScenarioParams, v) -> np.ndarray:
    out = np.zeros(params.dim, dtype=complex)
    out[params.n_k:params.n_k + 3] = v
    return out


def rho0_block() -> np.ndarray:
    return np.array(
        [
            [2.5, 0.0, -1.5],
            [0.0, (5 + SQRT5) / 2, 0.0],
            [-1.5, 0.0, 2.5],
        ],
        dtype=complex,
    )


def psi0_literal(params: ScenarioParams) -> np.ndarray:
    """Initial Lax vector with the literal closed-form coefficients (not a Lax eigenvector)."""
    a = params.alpha
    v = np.array([-1j * a * PSI_A, 1.0, a * PSI_B]) / np.sqrt(1 + a * a)
    return _embed_vector(params, v)


def psi0_lax(params: ScenarioParams) -> np.ndarray:
    """Initial Lax vector consistent with rho(0) and the closed-form rho_1.

    It lies in the degenerate eigenspace of rho(0) - (i/eps) H and dressing
    with it reproduces the closed-form rho_1(t) for every alpha.
    """
    a = params.alpha
    side = a / np.sqrt(2.0)
    v = np.array([side * (PSI_B - 1j * PSI_A), 1.0, side * (PSI_B + 1j * PSI_A)])
    return _embed_vector(params, v / np.sqrt(1 + a * a))


def scenario_init(params: ScenarioParams) -> ScenarioInit:
    return ScenarioInit(
        _embed(params, rho0_block()),
        psi0_lax(params),
        params.omega0,
        psi0_literal(params),
    )


def base_solution(params: ScenarioParams) -> Evolution:
    """rho(t) = W_5(t) rho(0) W_5(t)^+, the seed solution of the nonlinear equation."""
    return conjugation_solution(params.hamiltonian, _embed(params, rho0_block()), 5.0)


class Envelopes(NamedTuple):
    xi: complex
    zeta: complex
    xi_dot: complex
    zeta_dot: complex


def _switch(params: ScenarioParams, t: float):
    """(tanh(s - ln|alpha|), 1/(2 cosh(s - ln|alpha|))) with s = omega0 t / 5."""
    s = params.omega0 * t / 5.0
    x = s - np.log(abs(params.alpha))
    e = np.exp(-abs(x))
    return np.tanh(x), e / (1.0 + e * e)


def envelopes(params: ScenarioParams, t: float) -> Envelopes:
    """xi(t), zeta(t) and their exact time derivatives."""
    w0 = params.omega0
    rot = np.exp(1j * w0 * t)
    if params.alpha == 0:
        zeta = -3.0 * rot * rot
        return Envelopes(0j, zeta, 0j, 2j * w0 * zeta)
    th, half_sech = _switch(params, t)
    # alpha / (e^s + alpha^2 e^-s) = sign(alpha) / (2 cosh(s - ln|alpha|))
    xi = np.sign(params.alpha) * XI_AMPLITUDE * half_sech * rot
    xi_dot = xi * (1j * w0 - (w0 / 5.0) * th)
    # f = e^{2s} / (e^{2s} + alpha^2)
    f = 0.5 * (1.0 + th)
    fdot = (2.0 * w0 / 5.0) * f * (1.0 - f)
    core = -(9.0 * f + ZETA_PAST * (1.0 - f)) / 3.0
    zeta = core * rot * rot
    zeta_dot = (-(9.0 - ZETA_PAST) * fdot / 3.0) * rot * rot + 2j * w0 * zeta
    return Envelopes(complex(xi), complex(zeta), complex(xi_dot), complex(zeta_dot))


def _rho1_block(xi, zeta) -> np.ndarray:
    return np.array(
        [
            [5.0, xi, zeta],
            [np.conj(xi), 5.0 + SQRT5, xi],
            [np.conj(zeta), np.conj(xi), 5.0],
        ],
        dtype=complex,
    ) / NORM


def _rho1_block_dot(xi_dot, zeta_dot) -> np.ndarray:
    return np.array(
        [
            [0.0, xi_dot, zeta_dot],
            [np.conj(xi_dot), 0.0, xi_dot],
            [np.conj(zeta_dot), np.conj(xi_dot), 0.0],
        ],
        dtype=complex,
    ) / NORM


@dataclass(frozen=True)
class ClosedFormSolution:
    params: ScenarioParams

    def block(self, t: float) -> np.ndarray:
        env = envelopes(self.params, t)
        return _rho1_block(env.xi, env.zeta)

    def __call__(self, t: float) -> np.ndarray:
        return _embed(self.params, self.block(t))

    def derivative(self, t: float) -> np.ndarray:
        env = envelopes(self.params, t)
        return _embed(self.params, _rho1_block_dot(env.xi_dot, env.zeta_dot))

    def interaction(self, t: float) -> np.ndarray:
        """rho_int(t) = exp(i omega0 N t) rho_1(t) exp(-i omega0 N t), 3x3 block."""
        ph = np.exp(1j * self.params.omega0 * np.arange(3) * t)
        return ph[:, None] * self.block(t) * ph.conj()[None, :]

    def interaction_derivative(self, t: float) -> np.ndarray:
        w0 = self.params.omega0
        n = np.arange(3)
        ph = np.exp(1j * w0 * n * t)
        inner = self.derivative(t)[self.params.n_k:self.params.n_k + 3, self.params.n_k:self.params.n_k + 3]
        inner = inner + 1j * w0 * (n[:, None] - n[None, :]) * self.block(t)
        return ph[:, None] * inner * ph.conj()[None, :]

    def as_evolution(self) -> Evolution:
        return Evolution(self.__call__, self.derivative)


def rho1_closed(params: ScenarioParams) -> ClosedFormSolution:
    return ClosedFormSolution(params)


def rho_int_limits() -> tuple:
    """Asymptotic interaction-picture states (t -> -inf, t -> +inf)."""
    past = np.array(
        [
            [5.0, 0.0, -1 / 3 - 4 * SQRT5 * 1j / 3],
            [0.0, 5.0 + SQRT5, 0.0],
            [-1 / 3 + 4 * SQRT5 * 1j / 3, 0.0, 5.0],
        ],
        dtype=complex,
    ) / NORM
    future = np.array(
        [
            [5.0, 0.0, -3.0],
            [0.0, 5.0 + SQRT5, 0.0],
            [-3.0, 0.0, 5.0],
        ],
        dtype=complex,
    ) / NORM
    return past, future


def rho1_spectrum() -> np.ndarray:
    return np.array([2.0, 5.0 + SQRT5, 8.0]) / NORM


def _sigma(params: ScenarioParams, j: int, l: int) -> np.ndarray:
    out = np.zeros((params.dim, params.dim), dtype=complex)
    out[params.n_k + j, params.n_k + l] = 1.0
    return out


def h1_unperturbed(params: ScenarioParams, variant: str = "general") -> np.ndarray:
    """omega0 (N + c1) + eps c2 (general) or the detuned omega0 N + shift on |k+1>."""
    w0 = params.omega0
    n_op = params.hamiltonian.number_operator()
    if variant == "general":
        return w0 * (n_op + params.c1 * np.eye(params.dim)) + params.eps * params.c2 * np.eye(params.dim)
    if variant == "detuned":
        return w0 * n_op + (w0 / SQRT5) * (params.k + params.c1 + 1) * _sigma(params, 1, 1)
    raise ValueError(f"no unperturbed part defined for variant {variant!r}")


def _couplings(params: ScenarioParams, t: float) -> np.ndarray:
    """Off-diagonal (Rabi) part of the perturbation H_1(t)."""
    env = envelopes(params, t)
    w0, k, c1 = params.omega0, params.k, params.c1
    block = np.zeros((3, 3), dtype=complex)
    block[0, 1] = (w0 / 5) * (k + c1 + 0.5) * env.xi
    block[1, 2] = (w0 / 5) * (k + c1 + 1.5) * env.xi
    block[0, 2] = (w0 / 5) * (k + c1 + 1.0) * env.zeta
    block = block + block.conj().T
    return _embed(params, block)


def _check_sech(params: ScenarioParams, tol=1e-12):
    want = params.sech_params()
    if (
        abs(params.alpha - 1.0) > tol
        or abs(params.c1 - want.c1) > tol
        or abs(params.c2 - want.c2) > tol
    ):
        raise ParameterError("sech variant requires alpha=1, c1=-(k+1), eps*c2=-omega0*c1")


def h1_closed(params: ScenarioParams, t: float, variant: str = "general") -> np.ndarray:
    """Closed-form partner Hamiltonian h_1(t).

    ``general``: H~ + H_1(t). ``sech``: the pulse form, only for the
    parameters of ``ScenarioParams.sech_params``. ``detuned``: the detuned
    unperturbed part plus the Rabi couplings; differs from ``general`` by a
    multiple of the identity.
    """
    w0 = params.omega0
    if variant == "general":
        diag_shift = (w0 / SQRT5) * (params.k + params.c1 + 1) * _sigma(params, 1, 1)
        return h1_unperturbed(params, "general") + diag_shift + _couplings(params, t)
    if variant == "sech":
        _check_sech(params)
        n_op = params.hamiltonian.number_operator()
        pulse = w0 * SECH_D * np.exp(1j * w0 * t) / (10 * np.cosh(w0 * t / 5))
        drive = pulse * (_sigma(params, 0, 1) - _sigma(params, 1, 2))
        return w0 * n_op - drive - drive.conj().T
    if variant == "detuned":
        return h1_unperturbed(params, "detuned") + _couplings(params, t)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def h1_anticomm(params: ScenarioParams, t: float, rho1: np.ndarray = None) -> np.ndarray:
    """(H + eps c1) rho_1 + rho_1 (H + eps c1) + eps c2 built from the normalised rho_1."""
    if rho1 is None:
        rho1 = rho1_closed(params)(t)
    shifted = params.hamiltonian.diagonal + params.eps * params.c1
    return (
        shifted[:, None] * rho1
        + rho1 * shifted[None, :]
        + params.eps * params.c2 * np.eye(params.dim)
    )


def h1_block_eigenvalues(params: ScenarioParams, t: float, tol: float = 1e-12) -> np.ndarray:
    """(-e(t), 0, e(t)) with e = (omega0/5) sqrt(25 + 4u)."""
    if abs(params.c1 + params.k + 1) > tol or abs(params.c2) > tol:
        raise ParameterError("block eigenvalue formula needs c1 = -(k+1) and c2 = 0")
    w0 = params.omega0
    if params.alpha == 0:
        u = 0.0
    else:
        # u = e^{2s} a^2 / (e^{2s} + a^2)^2 = 1 / (4 cosh^2(s - ln|a|))
        _, half_sech = _switch(params, t)
        u = half_sech ** 2
    e = (w0 / 5) * np.sqrt(25 + 4 * u)
    return np.array([-e, 0.0, e])
