"""Evolution equations, a fixed-step RK4 integrator and solution combinators.

Three right-hand sides are supported:

* ``nonlinear``: i d(rho)/dt = [H, rho^2]
* ``linear``:    i d(rho)/dt = [h(t), rho]    (needs ``partner``: t -> h(t))
* ``lax``:       i d(psi)/dt = (H rho(t) + rho(t) H - mu H^2) psi
  (needs ``rho``: t -> rho(t) and ``mu``; an optional scalar ``gauge`` g
  replaces the generator by generator - g, which rescales psi by a scalar
  function of time and leaves its ray unchanged)
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import TOL
from .linalg import NumberHamiltonian, dagger, diag_commutator

logger = logging.getLogger(__name__)

MODES = ("nonlinear", "linear", "lax")

MatrixFn = Callable[[float], np.ndarray]


class IntegrationError(RuntimeError):
    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite state at step {step} (t={t:.6g})")
        self.step = step
        self.t = t


class SupportOverlapError(ValueError):
    pass


@dataclass
class Trajectory:
    t: np.ndarray
    values: np.ndarray
    dt: float
    max_symmetrize_drift: float = 0.0

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    def __len__(self):
        return len(self.t)

    def at(self, t: float, atol: float = 1e-9) -> np.ndarray:
        """Sample stored at time ``t`` (no interpolation)."""
        if len(self.t) > 1 and self.t[1] > self.t[0]:
            j = int(np.searchsorted(self.t, t))
            j = min(range(max(j - 1, 0), min(j + 1, len(self.t) - 1) + 1), key=lambda i: abs(self.t[i] - t))
        else:
            j = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[j] - t) > atol:
            raise KeyError(f"t={t} is not a grid point")
        return self.values[j]


@dataclass(frozen=True)
class Evolution:
    """A time-dependent matrix t -> rho(t), optionally with its exact derivative."""

    value: MatrixFn
    derivative: Optional[MatrixFn] = field(default=None)

    def __call__(self, t: float) -> np.ndarray:
        return self.value(t)


@dataclass(frozen=True)
class SolutionClassReport:
    is_projector_like: bool
    is_algebraic: bool
    a: float


def make_rhs(mode: str, h: NumberHamiltonian, *, partner=None, rho=None, mu=None, gauge=0.0):
    """Return f(t, y) = dy/dt for the chosen evolution equation."""
    hd = h.diagonal
    if mode == "nonlinear":
        def f(t, y):
            return -1j * diag_commutator(hd, y @ y)
    elif mode == "linear":
        if partner is None:
            raise ValueError("linear mode needs a partner Hamiltonian evaluator")

        def f(t, y):
            ht = partner(t)
            return -1j * (ht @ y - y @ ht)
    elif mode == "lax":
        if rho is None or mu is None:
            raise ValueError("lax mode needs rho(t) and mu")
        diag = mu * hd * hd + gauge

        def f(t, y):
            r = rho(t)
            gen = hd[:, None] * r + r * hd[None, :]
            return -1j * (gen @ y - diag * y)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return f


def rhs_eval(mode: str, h: NumberHamiltonian, state, t: float, **context) -> np.ndarray:
    return make_rhs(mode, h, **context)(t, np.asarray(state, dtype=complex))


def rk4(
    f,
    y0: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
    *,
    stride: int = 1,
    hermitian: bool = False,
    normalize: bool = False,
) -> Trajectory:
    """Classical fixed-step RK4 from t0 to t1 (either direction).

    Every ``stride``-th step is stored, plus the final state at t1. With
    ``hermitian`` the state is replaced by (y + y^+)/2 after every step;
    with ``normalize`` a vector state is rescaled to unit norm after every
    step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    span = t1 - t0
    n_full = int(np.floor(abs(span) / dt + 1e-9))
    if n_full > TOL.max_steps:
        raise ValueError(f"{n_full} steps exceed the limit of {TOL.max_steps}")
    h = np.copysign(dt, span) if span != 0 else dt
    remainder = span - n_full * h
    steps = [h] * n_full
    if abs(remainder) > 1e-12 * dt:
        steps.append(remainder)

    y = np.array(y0, dtype=complex)
    t = float(t0)
    ts = [t]
    ys = [y.copy()]
    max_drift = 0.0
    for j, hj in enumerate(steps, start=1):
        k1 = f(t, y)
        k2 = f(t + hj / 2, y + (hj / 2) * k1)
        k3 = f(t + hj / 2, y + (hj / 2) * k2)
        k4 = f(t + hj, y + hj * k3)
        y = y + (hj / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + j * h if j <= n_full else float(t1)
        if hermitian:
            sym = 0.5 * (y + dagger(y))
            drift = float(np.linalg.norm(y - sym))
            max_drift = max(max_drift, drift)
            y = sym
        if normalize:
            y = y / np.linalg.norm(y)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(j, t)
        if j % stride == 0 or j == len(steps):
            ts.append(t)
            ys.append(y.copy())
    if max_drift > TOL.symmetrize_drift:
        logger.info("max Hermiticity drift per step %.3e", max_drift)
    return Trajectory(np.array(ts), np.array(ys), dt * stride, max_drift)


def integrate(
    mode: str,
    h: NumberHamiltonian,
    initial_state,
    t0: float,
    t1: float,
    dt: float,
    *,
    stride: int = 1,
    normalize: bool = False,
    **context,
) -> Trajectory:
    f = make_rhs(mode, h, **context)
    return rk4(
        f,
        initial_state,
        t0,
        t1,
        dt,
        stride=stride,
        hermitian=(mode != "lax"),
        normalize=normalize,
    )


def _residual_norm(mode, h, rho, drho, t, context) -> float:
    f = make_rhs(mode, h, **context)
    return float(np.linalg.norm(1j * drho - 1j * f(t, rho)))


def vne_residual(traj: Trajectory, h: NumberHamiltonian, mode: str, **context) -> float:
    """max_j || i d(rho)/dt - R(rho) ||_F with centred differences on the samples."""
    if len(traj) < 3:
        raise ValueError("need at least 3 samples for centred differences")
    worst = 0.0
    for j in range(1, len(traj) - 1):
        drho = (traj.values[j + 1] - traj.values[j - 1]) / (traj.t[j + 1] - traj.t[j - 1])
        worst = max(worst, _residual_norm(mode, h, traj.values[j], drho, traj.t[j], context))
    return worst


def evolution_residual(
    evo: Evolution, h: NumberHamiltonian, mode: str, t_grid: Sequence[float], fd_step: float = 1e-4, **context
) -> float:
    """Residual of an evaluator; uses its exact derivative when available."""
    worst = 0.0
    for t in t_grid:
        if evo.derivative is not None:
            drho = evo.derivative(t)
        else:
            drho = (evo(t + fd_step) - evo(t - fd_step)) / (2 * fd_step)
        worst = max(worst, _residual_norm(mode, h, evo(t), drho, t, context))
    return worst


def conjugation_solution(h: NumberHamiltonian, rho0: np.ndarray, a: float) -> Evolution:
    """t -> W_a(t) rho0 W_a(t)^+ with W_a(t) = exp(-i a H t)."""
    hd = h.diagonal
    rho0 = np.array(rho0, dtype=complex)

    def value(t):
        ph = np.exp(-1j * a * hd * t)
        return ph[:, None] * rho0 * ph.conj()[None, :]

    def derivative(t):
        return -1j * a * diag_commutator(hd, value(t))

    return Evolution(value, derivative)


def classify_solution(rho0: np.ndarray, h: NumberHamiltonian, a: float, tol: float = 1e-10) -> SolutionClassReport:
    rho0 = np.asarray(rho0, dtype=complex)
    defect = rho0 @ rho0 - a * rho0
    algebraic = np.linalg.norm(defect) <= tol
    projector_like = np.linalg.norm(diag_commutator(h.diagonal, defect)) <= tol
    return SolutionClassReport(bool(projector_like), bool(algebraic), float(a))


def rescale_solution(evo: Evolution, c: float) -> Evolution:
    """t -> c rho(c t); maps solutions of the nonlinear equation to solutions."""
    if c == 0:
        raise ValueError("scale factor must be nonzero")
    if c == 1:
        return evo
    derivative = None
    if evo.derivative is not None:
        def derivative(t):
            return c * c * evo.derivative(c * t)
    return Evolution(lambda t: c * evo(c * t), derivative)


def weak_superposition(parts: Sequence[tuple], tol: float = TOL.support_overlap) -> Evolution:
    """Combine mutually orthogonal solutions as sum_k p_k rho_k(p_k t)."""
    parts = list(parts)
    if not parts:
        raise ValueError("need at least one part")
    starts = [evo(0.0) for _, evo in parts]
    for j in range(len(parts)):
        for l in range(len(parts)):
            if j != l and np.linalg.norm(starts[j] @ starts[l]) > tol:
                raise SupportOverlapError(f"parts {j} and {l} overlap")
    scaled = [rescale_solution(evo, p) for p, evo in parts]

    def value(t):
        return sum(s(t) for s in scaled)

    derivative = None
    if all(s.derivative is not None for s in scaled):
        def derivative(t):
            return sum(s.derivative(t) for s in scaled)

    return Evolution(value, derivative)
