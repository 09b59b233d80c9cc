"""Dense complex matrix helpers on a truncated number basis.

Matrices are plain ``numpy`` complex arrays. Functions never modify their
inputs.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import TOL


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class NumberHamiltonian:
    """H = eps * diag(r, r+1, ..., r+dim-1) with a marked 3-level block.

    ``block_start`` is the Fock index of the lowest block level, so the block
    spans indices block_start, block_start+1, block_start+2.
    """

    eps: float = 1.0
    r: float = 0.5
    dim: int = 16
    block_start: int = 2

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.block_start < 0 or self.block_start + 2 >= self.dim:
            raise ValueError(
                f"block at {self.block_start} does not fit in dim={self.dim}"
            )

    @property
    def levels(self) -> np.ndarray:
        """Eigenvalue labels r + n of N."""
        return self.r + np.arange(self.dim, dtype=float)

    @property
    def diagonal(self) -> np.ndarray:
        return self.eps * self.levels

    @property
    def block(self) -> slice:
        return slice(self.block_start, self.block_start + 3)

    @property
    def block_label(self) -> float:
        """Level label k = r + n_k of the lowest block state."""
        return self.r + self.block_start

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal).astype(complex)

    def number_operator(self) -> np.ndarray:
        return np.diag(self.levels).astype(complex)


def _check_square(*mats):
    shape = None
    for m in mats:
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got {m.shape}")
        if shape is not None and m.shape != shape:
            raise DimensionError(f"dimension mismatch {shape} vs {m.shape}")
        shape = m.shape


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def bracket(a: np.ndarray, b: np.ndarray, kind: str = "commutator") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_square(a, b)
    if kind == "commutator":
        return commutator(a, b)
    if kind == "anticommutator":
        return anticommutator(a, b)
    raise ValueError(f"unknown bracket kind {kind!r}")


def diag_commutator(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """[diag(h), x] without forming the diagonal matrix."""
    return h[:, None] * x - x * h[None, :]


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0]), ord="fro"))


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - dagger(a), ord="fro"))


def conjugate_unitary(u: np.ndarray, a: np.ndarray, tol: float = TOL.unitary) -> np.ndarray:
    """Return U A U^dagger after checking that U is unitary."""
    u = np.asarray(u, dtype=complex)
    a = np.asarray(a, dtype=complex)
    _check_square(u, a)
    defect = unitarity_defect(u)
    if defect > tol * max(1.0, np.sqrt(u.shape[0])):
        raise NotUnitaryError(f"||U^+U - 1|| = {defect:.3e}")
    return u @ a @ dagger(u)


def trace_moment(h: np.ndarray, rho: np.ndarray, n: int) -> complex:
    """Tr(H rho^n) for n >= 1."""
    if n < 1:
        raise ValueError("moment order must be >= 1; use np.trace for n = 0")
    h = np.asarray(h, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _check_square(h, rho)
    return complex(np.trace(h @ np.linalg.matrix_power(rho, n)))


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off, ord="fro"))


class Eigensystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def eig_hermitian(a: np.ndarray, tol: float = TOL.hermitian, max_sweeps: int = 60) -> Eigensystem:
    """Cyclic complex Jacobi eigensolver for small Hermitian matrices.

    Pivots are visited row by row (p < q) in every sweep so the result is
    reproducible. Eigenvalues are returned ascending, eigenvectors as
    columns.
    """
    a = np.array(a, dtype=complex)
    _check_square(a)
    n = a.shape[0]
    scale = max(np.linalg.norm(a, ord="fro"), 1.0)
    if hermiticity_defect(a) > tol * scale:
        raise NotHermitianError(f"input not Hermitian (defect {hermiticity_defect(a):.3e})")
    a = 0.5 * (a + dagger(a))
    v = np.eye(n, dtype=complex)
    threshold = TOL.jacobi_offdiag * scale

    for _ in range(max_sweeps):
        if _off_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # columns: a' = a R, R = [[c, s*phase], [-s*conj(phase), c]] on (p, q)
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * np.conj(phase) * cq
                a[:, q] = s * phase * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * phase * rq
                a[q, :] = s * np.conj(phase) * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * phase * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    values = np.real(np.diag(a))
    order = np.argsort(values, kind="stable")
    return Eigensystem(values[order], v[:, order])


def eigvals_hermitian(a: np.ndarray) -> np.ndarray:
    return eig_hermitian(a).values


def phase_evolution(h: NumberHamiltonian, a: float, t: float) -> np.ndarray:
    """W_a(t) = exp(-i a H t), diagonal."""
    return np.diag(np.exp(-1j * a * h.diagonal * t))


class DensityReport(NamedTuple):
    hermitian: bool
    psd: bool
    trace_one: bool


def density_check(rho: np.ndarray, tol: float = 1e-10) -> DensityReport:
    rho = np.asarray(rho, dtype=complex)
    _check_square(rho)
    herm = hermiticity_defect(rho) <= tol
    if herm:
        psd = bool(eigvals_hermitian(rho)[0] >= -tol)
    else:
        psd = False
    trace_one = abs(np.trace(rho) - 1.0) <= tol
    return DensityReport(bool(herm), psd, bool(trace_one))
