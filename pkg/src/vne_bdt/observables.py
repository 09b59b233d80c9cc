"""Position-space diagnostics of states in the oscillator number basis.

Units are hbar = m = omega_osc = 1, so x is dimensionless. Row/column j of a
density matrix is the Fock state |j + fock_offset>.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .linalg import eigvals_hermitian

MAX_FOCK = 200
X_LIMIT = 20.0


def default_x_grid(bound: float = 12.0, points: int = 4801) -> np.ndarray:
    return np.linspace(-bound, bound, points)


def mean_x(rho: np.ndarray, fock_offset: int = 0) -> float:
    """<x> = Tr rho (a + a^+) / sqrt2 = sqrt2 sum_n sqrt(n+1) Re rho_{n+1,n}."""
    rho = np.asarray(rho)
    n = np.arange(rho.shape[0] - 1) + fock_offset
    sub = np.diagonal(rho, offset=-1)
    return float(np.sqrt(2.0) * np.sum(np.sqrt(n + 1.0) * sub.real))


def hermite_table(n_max: int, x) -> np.ndarray:
    """Oscillator eigenfunctions psi_0..psi_{n_max} at x, shape (n_max+1, len(x)).

    Uses psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}.
    """
    if n_max > MAX_FOCK:
        raise ValueError(f"Fock index {n_max} beyond validated range {MAX_FOCK}")
    if n_max < 0:
        raise ValueError("Fock index must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) > X_LIMIT):
        raise ValueError(f"|x| must not exceed {X_LIMIT}")
    out = np.empty((n_max + 1, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_psi(n: int, x: float) -> float:
    return float(hermite_table(n, x)[n, 0])


def position_density(rho: np.ndarray, x, fock_offset: int = 0):
    """<x|rho|x> = sum_mn rho_mn psi_m(x) psi_n(x); real for Hermitian rho."""
    rho = np.asarray(rho)
    scalar = np.ndim(x) == 0
    psi = hermite_table(rho.shape[0] - 1 + fock_offset, x)[fock_offset:]
    dens = np.einsum("mx,mn,nx->x", psi, rho, psi).real
    return float(dens[0]) if scalar else dens


def integrate_x(values: np.ndarray, x_grid: np.ndarray) -> np.ndarray:
    """Composite Simpson rule along the last axis."""
    return simpson(values, x=x_grid, axis=-1)


def mean_x_quadrature(rho: np.ndarray, x_grid: Optional[np.ndarray] = None, fock_offset: int = 0) -> float:
    if x_grid is None:
        x_grid = default_x_grid()
    return float(integrate_x(x_grid * position_density(rho, x_grid, fock_offset), x_grid))


@dataclass
class DensityGrid:
    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray  # shape (len(t_grid), len(x_grid))
    clamped: float = 0.0  # largest |negative value| set to zero

    def norms(self) -> np.ndarray:
        return integrate_x(self.values, self.x_grid)


def density_grid(
    solution: Callable[[float], np.ndarray],
    t_grid: Sequence[float],
    x_grid: Optional[Sequence[float]] = None,
    fock_offset: int = 0,
) -> DensityGrid:
    """Tabulate rho(x, t) = <x|rho(t)|x>."""
    t_grid = np.asarray(t_grid, dtype=float)
    x_grid = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0) or np.any(np.diff(x_grid) <= 0):
        raise ValueError("grids must be strictly increasing")
    first = np.asarray(solution(t_grid[0]))
    psi = hermite_table(first.shape[0] - 1 + fock_offset, x_grid)[fock_offset:]
    values = np.empty((t_grid.size, x_grid.size))
    for j, t in enumerate(t_grid):
        values[j] = np.einsum("mx,mn,nx->x", psi, solution(t), psi).real
    worst = float(-values.min()) if values.min() < 0 else 0.0
    if worst > 1e-10:
        raise ValueError(f"density negative beyond tolerance ({-worst:.3e})")
    np.clip(values, 0.0, None, out=values)
    return DensityGrid(t_grid, x_grid, values, worst)


def spectrum_trajectory(
    evaluator: Callable[[float], np.ndarray], t_grid: Sequence[float], restrict: Optional[slice] = None
) -> np.ndarray:
    """Sorted eigenvalues at each t; ``restrict`` selects a diagonal sub-block."""
    rows = []
    for t in t_grid:
        m = evaluator(t)
        if restrict is not None:
            m = m[restrict, restrict]
        rows.append(eigvals_hermitian(m))
    return np.array(rows)
