"""
Asymptotics Service - large-position structure of the transformed recurrence
At large j the transformed eigenproblem reduces to F2(phi_{j+1} + phi_{j-1}) + F1 phi_j = 0,
whose characteristic roots r^2 + (F1/F2) r + 1 = 0 split the chain into three branches:
oscillatory (|F1/F2| < 2), critical (|F1/F2| = 2, Jordan block) and localized (|F1/F2| > 2).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from starkchain.core.config import get_settings
from starkchain.core.errors import BranchError, ParameterError
from starkchain.core.logging import get_logger
from starkchain.models import ChainParams
from starkchain.services.gauge_service import LinearFit, fit_linear, skin_exponent

logger = get_logger(__name__)


class BranchKind(str, Enum):
    OSCILLATORY = "Oscillatory"
    CRITICAL = "Critical"
    LOCALIZED = "Localized"


@dataclass(frozen=True)
class BranchClassification:
    ratio: float
    kind: BranchKind
    roots: Tuple[complex, complex]
    q: Optional[float] = None
    r_star: Optional[float] = None
    kappa: Optional[float] = None

    @property
    def delta(self) -> float:
        """Distance |F1|/(2|F2|) - 1 from the threshold."""
        return abs(self.ratio) / 2.0 - 1.0


@dataclass(frozen=True)
class FiniteSizeScales:
    Xi_N: float
    delta: float
    delta_N: float
    delta_N_gamma: float
    Lambda_N: Optional[float] = None
    j_star: Optional[float] = None


def _ratio(F1: float, F2: float) -> float:
    if F2 == 0.0:
        raise ParameterError("F2 = 0: the asymptotic recurrence is undefined")
    return F1 / F2


def arcosh(x: float) -> float:
    """ln(x + sqrt(x^2 - 1)) with the root clamped at 0 for x rounding below 1."""
    return math.log(x + math.sqrt(max(x * x - 1.0, 0.0)))


def characteristic_roots(F1: float, F2: float) -> Tuple[complex, complex]:
    """Roots of r^2 + (F1/F2) r + 1 = 0, larger modulus first, then larger real part."""
    c = _ratio(F1, F2)
    disc = c * c - 4.0
    if disc > 0.0:
        # cancellation-free: the larger root directly, the smaller from the product r+ r- = 1
        big = (-c - math.copysign(math.sqrt(disc), c)) / 2.0
        roots = [complex(big), complex(1.0 / big)]
    else:
        root = math.sqrt(-disc) / 2.0
        roots = [complex(-c / 2.0, root), complex(-c / 2.0, -root)]
    roots.sort(key=lambda r: (-abs(r), -r.real, -r.imag))
    return roots[0], roots[1]


def transfer_matrix(F1: float, F2: float) -> np.ndarray:
    c = _ratio(F1, F2)
    return np.array([[-c, -1.0], [1.0, 0.0]])


def jordan_defect(T: np.ndarray, r: complex) -> int:
    """2 - rank(T - rI): 1 when r is a defective repeated eigenvalue of the 2x2 T."""
    return 2 - int(np.linalg.matrix_rank(T - r * np.eye(2)))


def classify_branch(params: ChainParams, tol: Optional[float] = None) -> BranchClassification:
    tol = get_settings().critical_tol if tol is None else tol
    ratio = _ratio(params.F1, params.F2)
    roots = characteristic_roots(params.F1, params.F2)
    if abs(abs(ratio) - 2.0) <= tol:
        r_star = -math.copysign(1.0, ratio)
        return BranchClassification(ratio=ratio, kind=BranchKind.CRITICAL, roots=roots, r_star=r_star)
    if abs(ratio) < 2.0:
        q = math.acos(-ratio / 2.0)
        return BranchClassification(ratio=ratio, kind=BranchKind.OSCILLATORY, roots=roots, q=q)
    kappa = arcosh(abs(ratio) / 2.0)
    return BranchClassification(ratio=ratio, kind=BranchKind.LOCALIZED, roots=roots, kappa=kappa)


@dataclass(frozen=True)
class Envelope:
    """Predicted log|psi_j^R| up to an additive constant."""

    kind: BranchKind
    eta: float
    kappa: float = 0.0
    A: float = 1.0
    B: float = 0.0

    def __call__(self, j: np.ndarray) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        value = self.eta * np.log(j)
        if self.kind is BranchKind.LOCALIZED:
            value = value - self.kappa * j
        elif self.kind is BranchKind.CRITICAL:
            value = value + np.log(np.abs(self.A + self.B * j))
        return value

    def peak(self, j_max: float, samples: int = 200001) -> float:
        """Numerical maximiser on (0, j_max]."""
        grid = np.linspace(j_max / samples, j_max, samples)
        return float(grid[np.argmax(self(grid))])


def envelope_model(branch: BranchClassification, eta: float, A: float = 1.0, B: float = 0.0) -> Envelope:
    """A and B only enter the critical branch, where they stay free fit parameters."""
    return Envelope(kind=branch.kind, eta=eta, kappa=branch.kappa or 0.0, A=A, B=B)


def screening_scale(params: ChainParams) -> float:
    """Xi_N = (gamma/F2) ln N."""
    return skin_exponent(params) * math.log(params.N)


def screening_gamma(N: int, F2: float, target: float = 5.0) -> float:
    """gamma at which Xi_N reaches target."""
    return target * F2 / math.log(N)


def competition_scale(params: ChainParams) -> float:
    """Lambda_N = |gamma| / (F2 kappa N), localized branch only."""
    branch = classify_branch(params)
    if branch.kind is not BranchKind.LOCALIZED:
        raise BranchError(f"Lambda_N needs the localized branch, got {branch.kind.value} at F1/F2={branch.ratio:.6g}")
    return abs(params.gamma) / (params.F2 * branch.kappa * params.N)


def envelope_peak(eta: float, kappa: float) -> float:
    """j* = |eta| / kappa."""
    if kappa <= 0.0:
        raise BranchError(f"envelope peak needs kappa > 0, got {kappa}")
    return abs(eta) / kappa


def threshold_widths(params: ChainParams) -> Tuple[float, float]:
    """(delta_N, delta_N_gamma) = (N^-2, gamma^2 / (2 F2^2 N^2)); crossover guides only."""
    _ratio(params.F1, params.F2)
    n2 = float(params.N) ** 2
    return 1.0 / n2, params.gamma ** 2 / (2.0 * params.F2 ** 2 * n2)


def kappa_near_threshold_ratio(delta: float) -> float:
    """arcosh(1 + delta) / sqrt(2 delta); tends to 1 as delta -> 0."""
    return arcosh(1.0 + delta) / math.sqrt(2.0 * delta)


def finite_size_scales(params: ChainParams) -> FiniteSizeScales:
    branch = classify_branch(params)
    delta_N, delta_N_gamma = threshold_widths(params)
    Lambda_N = j_star = None
    if branch.kind is BranchKind.LOCALIZED:
        Lambda_N = competition_scale(params)
        j_star = envelope_peak(skin_exponent(params), branch.kappa)
    return FiniteSizeScales(
        Xi_N=screening_scale(params),
        delta=branch.delta,
        delta_N=delta_N,
        delta_N_gamma=delta_N_gamma,
        Lambda_N=Lambda_N,
        j_star=j_star,
    )


def tail_window(phi: np.ndarray, j_star: Optional[float] = None) -> Tuple[int, int]:
    """
    1-based inclusive window of the decaying tail of |phi|.

    Starts at the first site after the peak whose relative magnitude drops below
    tail_head, ends at the last site above tail_floor; the last tail_boundary
    sites and j < 2 ceil(j*) are excluded.
    """
    cfg = get_settings()
    magnitude = np.abs(np.asarray(phi, dtype=float))
    magnitude = magnitude / magnitude.max()
    N = magnitude.size
    peak = int(np.argmax(magnitude))
    after = np.arange(peak, N)
    below_head = after[magnitude[after] <= cfg.tail_head]
    above_floor = after[magnitude[after] >= cfg.tail_floor]
    if below_head.size == 0 or above_floor.size == 0:
        raise BranchError("state has no resolvable decaying tail")
    lo = int(below_head[0]) + 1
    hi = min(int(above_floor[-1]) + 1, N - cfg.tail_boundary)
    if j_star:
        lo = max(lo, 2 * math.ceil(j_star))
    if hi - lo + 1 < 3:
        raise BranchError(f"tail window [{lo}, {hi}] too short to fit")
    return lo, hi


def tail_slope(phi: np.ndarray, j_star: Optional[float] = None) -> LinearFit:
    """Linear fit of ln|phi_j| over the tail window; the slope estimates -kappa."""
    lo, hi = tail_window(phi, j_star)
    j = np.arange(lo, hi + 1, dtype=float)
    fit = fit_linear(j, np.log(np.abs(np.asarray(phi, dtype=float)[lo - 1:hi])))
    logger.debug(f"tail fit over [{lo}, {hi}]: slope={fit.slope:.6f}")
    return fit


def recurrence_residual(phi: np.ndarray, F1: float, F2: float) -> np.ndarray:
    """|F2(phi_{j+1}+phi_{j-1}) + F1 phi_j| / (max|phi| (|F1| + 2|F2|)) for interior sites 2..N-1."""
    phi = np.asarray(phi, dtype=float)
    scale = np.max(np.abs(phi)) * (abs(F1) + 2.0 * abs(F2))
    residual = F2 * (phi[2:] + phi[:-2]) + F1 * phi[1:-1]
    return np.abs(residual) / scale
