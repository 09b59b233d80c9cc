"""Numerical tolerances shared across the package."""

from dataclasses import dataclass

import numpy as np

SQRT5 = np.sqrt(5.0)
# Tr rho(0) of the worked example, and its inverse used to normalise.
TRACE_RHO0 = (15.0 + SQRT5) / 2.0
NORMALIZATION_SCALE = 2.0 / (15.0 + SQRT5)


@dataclass(frozen=True)
class Tolerances:
    unitary: float = 1e-12
    hermitian: float = 1e-10
    projector_norm: float = 1e-14
    support_overlap: float = 1e-10
    symmetrize_drift: float = 1e-12
    jacobi_offdiag: float = 1e-15
    max_steps: int = 10_000_000


TOL = Tolerances()
