"""
Chain Service - one-body model construction
Builds the graded nonreciprocal hoppings, the open-chain Hamiltonian and product initial states.

Site j and bond j are 1-based in every formula (bond j joins sites j and j+1);
arrays store them 0-based, so site j lives at index j-1.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from starkchain.core.config import get_settings
from starkchain.core.errors import ParameterError
from starkchain.models import ChainParams, OrbitalState


@dataclass(frozen=True)
class HoppingAmplitudes:
    left: np.ndarray   # t_j^L, bonds 1..N-1
    right: np.ndarray  # t_j^R, bonds 1..N-1

    @property
    def products(self) -> np.ndarray:
        return self.left * self.right


@dataclass(frozen=True)
class DenseOperator:
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def is_tridiagonal(self) -> bool:
        band = np.triu(np.tril(self.entries, 1), -1)
        return bool(np.array_equal(band, self.entries))


def bond_indices(N: int) -> np.ndarray:
    return np.arange(1, N, dtype=float)


def site_indices(N: int) -> np.ndarray:
    return np.arange(1, N + 1, dtype=float)


def half_chain(N: int) -> range:
    """Storage indices of the left half A = {1..N/2}."""
    return range(0, N // 2)


def build_hoppings(params: ChainParams) -> HoppingAmplitudes:
    j = bond_indices(params.N)
    left = params.J - params.gamma + j * params.F2
    right = params.J + params.gamma + j * params.F2
    return HoppingAmplitudes(left=left, right=right)


def build_hamiltonian(params: ChainParams) -> DenseOperator:
    """H[j][j] = F1*j, H[j][j+1] = t_j^L, H[j+1][j] = t_j^R."""
    cap = get_settings().dense_cap
    if params.N > cap:
        raise ParameterError(f"N={params.N} exceeds the dense storage cap {cap}")
    hoppings = build_hoppings(params)
    entries = np.diag(params.F1 * site_indices(params.N)).astype(complex)
    entries += np.diag(hoppings.left, 1) + np.diag(hoppings.right, -1)
    return DenseOperator(entries=entries)


def build_cdw_orbitals(N: int) -> OrbitalState:
    """Half-filled product state occupying sites 2, 4, ..., N."""
    if N < 2 or N % 2:
        raise ParameterError(f"the charge-density-wave state needs an even N >= 2, got N={N}")
    n_particles = N // 2
    U = np.zeros((N, n_particles), dtype=complex)
    U[2 * np.arange(1, n_particles + 1) - 1, np.arange(n_particles)] = 1.0
    return OrbitalState(U=U, t=0.0)


def detect_decoupling_bonds(params: ChainParams) -> List[int]:
    """Bonds with t^L * t^R <= 0; an empty list certifies the real positive gauge."""
    products = build_hoppings(params).products
    return [int(j) + 1 for j in np.flatnonzero(products <= 0.0)]
