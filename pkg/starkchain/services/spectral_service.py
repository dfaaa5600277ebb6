"""
Spectral Service - eigensolve and localization diagnostics
Diagonalizes the chain through its symmetric transformed form, dresses the
eigenvectors with the gauge, and builds the (gamma, F1/F2) localization map.
"""

import asyncio
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from starkchain.core.config import get_settings
from starkchain.core.errors import NumericalError, ParameterError, StarkChainError
from starkchain.core.logging import get_logger
from starkchain.models import ChainParams
from starkchain.services.gauge_service import gauge_product, map_eigenvector, transform_chain

logger = get_logger(__name__)


@dataclass(frozen=True)
class StateDiagnostics:
    rho: np.ndarray
    X: float
    ipr: float
    pol: float


@dataclass(frozen=True)
class EigenSet:
    energies: np.ndarray    # ascending
    phi: np.ndarray         # orthonormal transformed eigenvectors, columns
    psi_right: np.ndarray   # D phi
    psi_left: np.ndarray    # D^-1 phi

    @property
    def size(self) -> int:
        return self.energies.size

    @cached_property
    def diagnostics(self) -> List[StateDiagnostics]:
        return [state_diagnostics(self.psi_right[:, n]) for n in range(self.size)]

    @property
    def ipr(self) -> np.ndarray:
        return np.array([diag.ipr for diag in self.diagnostics])

    @property
    def pol(self) -> np.ndarray:
        return np.array([diag.pol for diag in self.diagnostics])

    @property
    def X(self) -> np.ndarray:
        return np.array([diag.X for diag in self.diagnostics])

    def biorthogonality_defect(self) -> float:
        """Largest off-diagonal |(psi_m^L)^T psi_n^R| after normalizing by the diagonal."""
        overlaps = self.psi_left.T @ self.psi_right
        norms = np.sqrt(np.abs(np.outer(np.diag(overlaps), np.diag(overlaps))))
        off = np.abs(overlaps) / norms
        np.fill_diagonal(off, 0.0)
        return float(off.max()) if off.size > 1 else 0.0

    def right_residuals(self, H: np.ndarray) -> np.ndarray:
        """||H psi_n^R - E_n psi_n^R|| / (||H|| ||psi_n^R||) per state."""
        residual = H @ self.psi_right - self.psi_right * self.energies[None, :]
        scale = np.linalg.norm(H, 2) * np.linalg.norm(self.psi_right, axis=0)
        return np.linalg.norm(residual, axis=0) / scale


def eigensolve(params: ChainParams) -> EigenSet:
    """Similarity route: symmetric tridiagonal solve of D^-1 H D, then psi^R = D phi, psi^L = D^-1 phi."""
    chain = transform_chain(params)
    gauge = gauge_product(params)
    try:
        energies, phi = eigh_tridiagonal(chain.diag, chain.offdiag)
    except LinAlgError as e:
        raise NumericalError(f"tridiagonal eigensolver did not converge: {e}") from e

    # largest-magnitude component positive
    pivots = np.argmax(np.abs(phi), axis=0)
    phi = phi * np.sign(phi[pivots, np.arange(phi.shape[1])])[None, :]

    return EigenSet(
        energies=energies,
        phi=phi,
        psi_right=map_eigenvector(gauge, phi, "right"),
        psi_left=map_eigenvector(gauge, phi, "left"),
    )


def state_diagnostics(psi_right_column: np.ndarray) -> StateDiagnostics:
    """rho_j = |psi_j|^2 / sum|psi|^2, X = sum (j-1)/(N-1) rho_j, IPR = sum rho_j^2, pol = 2X - 1."""
    weights = np.abs(np.asarray(psi_right_column)) ** 2
    total = weights.sum()
    if not np.isfinite(total) or total == 0.0:
        raise ParameterError("state diagnostics need a nonzero finite vector")
    rho = weights / total
    N = rho.size
    X = float(np.dot(np.arange(N) / (N - 1), rho))
    return StateDiagnostics(rho=rho, X=X, ipr=float(np.sum(rho ** 2)), pol=2.0 * X - 1.0)


def mean_edge_polarization(eigs: EigenSet) -> float:
    return float(np.mean(eigs.pol))


def ipr_top_fraction(eigs: EigenSet, fraction: float) -> float:
    """Mean IPR of the ceil(fraction N) most localized states; ties by ascending energy, then index."""
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"fraction must lie in (0, 1], got {fraction}")
    ipr = eigs.ipr
    count = max(1, math.ceil(fraction * eigs.size - 1e-9))
    order = np.lexsort((np.arange(eigs.size), eigs.energies, -ipr))
    return float(np.mean(ipr[order[:count]]))


@dataclass(frozen=True)
class LocalizationMap:
    gamma_grid: np.ndarray
    ratio_grid: np.ndarray
    mean_pol: np.ndarray   # shape (len(gamma_grid), len(ratio_grid))
    ipr_top20: np.ndarray
    valid: np.ndarray
    fixed: ChainParams
    reasons: Dict[Tuple[int, int], str] = field(default_factory=dict)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.gamma_grid.size, self.ratio_grid.size


@dataclass(frozen=True)
class LineCut:
    gamma: float
    ratio: np.ndarray
    mean_pol: np.ndarray
    ipr_top20: np.ndarray
    valid: np.ndarray


def _map_cell(template: ChainParams, gamma: float, ratio: float, fraction: float) -> Tuple[float, float, bool, str]:
    """One map cell; errors become an invalid flag with a reason."""
    try:
        eigs = eigensolve(template.with_gamma(gamma).with_ratio(ratio))
        return mean_edge_polarization(eigs), ipr_top_fraction(eigs, fraction), True, ""
    except StarkChainError as e:
        return math.nan, math.nan, False, e.detail


def _validate_grids(template: ChainParams, gamma_grid: Sequence[float], ratio_grid: Sequence[float]) -> None:
    if len(gamma_grid) == 0 or len(ratio_grid) == 0:
        raise ParameterError("localization map grids must be nonempty")
    if not template.has_gradient:
        raise ParameterError("localization map needs F2 != 0")


async def build_localization_map_async(
    template: ChainParams,
    gamma_grid: Sequence[float],
    ratio_grid: Sequence[float],
    threads: Optional[int] = None,
    fraction: Optional[float] = None,
) -> LocalizationMap:
    """
    Fill the map cell by cell.

    Cells run in a process pool when threads > 1 and are gathered in cell
    order, so the output never depends on completion order.
    """
    cfg = get_settings()
    _validate_grids(template, gamma_grid, ratio_grid)
    threads = cfg.threads if threads is None else threads
    fraction = cfg.ipr_fraction if fraction is None else fraction
    gammas = np.asarray(gamma_grid, dtype=float)
    ratios = np.asarray(ratio_grid, dtype=float)
    cells = [(float(g), float(r)) for g in gammas for r in ratios]
    logger.info(f"Building localization map: {gammas.size} x {ratios.size} cells on {threads} worker(s)")

    if threads <= 1:
        results = [_map_cell(template, g, r, fraction) for g, r in cells]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [loop.run_in_executor(pool, _map_cell, template, g, r, fraction) for g, r in cells]
            results = await asyncio.gather(*futures)

    shape = (gammas.size, ratios.size)
    mean_pol = np.array([res[0] for res in results]).reshape(shape)
    ipr_top = np.array([res[1] for res in results]).reshape(shape)
    valid = np.array([res[2] for res in results]).reshape(shape)
    reasons = {}
    for index, res in enumerate(results):
        if not res[2]:
            cell = divmod(index, ratios.size)
            reasons[cell] = res[3]
            logger.warning(f"⚠️ invalid map cell gamma={cells[index][0]:.6g}, ratio={cells[index][1]:.6g}: {res[3]}")
    return LocalizationMap(
        gamma_grid=gammas, ratio_grid=ratios, mean_pol=mean_pol, ipr_top20=ipr_top,
        valid=valid, fixed=template, reasons=reasons,
    )


def build_localization_map(
    template: ChainParams,
    gamma_grid: Sequence[float],
    ratio_grid: Sequence[float],
    threads: Optional[int] = None,
    fraction: Optional[float] = None,
) -> LocalizationMap:
    return asyncio.run(build_localization_map_async(template, gamma_grid, ratio_grid, threads, fraction))


def line_cut(localization_map: LocalizationMap, gamma: float) -> LineCut:
    """Row of the map at a gamma that lies exactly on the grid."""
    rows = np.flatnonzero(np.isclose(localization_map.gamma_grid, gamma, rtol=0.0, atol=1e-12))
    if rows.size == 0:
        raise ParameterError(f"gamma={gamma} is not a row of the map grid")
    row = int(rows[0])
    return LineCut(
        gamma=float(localization_map.gamma_grid[row]),
        ratio=localization_map.ratio_grid,
        mean_pol=localization_map.mean_pol[row],
        ipr_top20=localization_map.ipr_top20[row],
        valid=localization_map.valid[row],
    )
