"""
Occupied-orbital state of a free-fermion Slater determinant.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OrbitalState:
    """N x N_p matrix of occupied orbitals (columns) at time t."""

    U: np.ndarray
    t: float = 0.0

    @property
    def n_sites(self) -> int:
        return self.U.shape[0]

    @property
    def n_particles(self) -> int:
        return self.U.shape[1]

    def gram(self) -> np.ndarray:
        """Overlap matrix M = U^dagger U."""
        return self.U.conj().T @ self.U

    def gram_determinant(self) -> complex:
        """Norm of the Slater determinant built from U."""
        return np.linalg.det(self.gram())

    def singular_values(self) -> np.ndarray:
        """Singular values of U, largest first."""
        return np.linalg.svd(self.U, compute_uv=False)

    def smallest_singular_value(self) -> float:
        return float(self.singular_values()[-1])
