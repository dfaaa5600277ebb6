"""
Gauge Service - exact diagonal similarity transformation
Removes the bond asymmetry of the graded chain: D^-1 H D is symmetric tridiagonal
with couplings tau_j = sqrt(t_j^L t_j^R), and d_j grows algebraically as j^eta.

All gauge work happens on log d; d itself is only exponentiated on demand.
"""

from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np
from scipy.special import gammaln

from starkchain.core.errors import DecouplingError, GammaPoleError, ParameterError
from starkchain.core.logging import get_logger
from starkchain.models import ChainParams
from starkchain.services.chain_service import build_hoppings, detect_decoupling_bonds, site_indices

logger = get_logger(__name__)


@dataclass(frozen=True)
class SimilarityGauge:
    log_d: np.ndarray  # log d_j, sites 1..N, log_d[0] == 0
    eta: float

    @property
    def d(self) -> np.ndarray:
        return np.exp(self.log_d)

    @property
    def log_increments(self) -> np.ndarray:
        """ln(d_{j+1}/d_j) for bonds 1..N-1."""
        return np.diff(self.log_d)


@dataclass(frozen=True)
class TransformedChain:
    tau: np.ndarray        # sqrt(t^L t^R) >= 0, bonds 1..N-1
    diag: np.ndarray       # F1 * j, sites 1..N
    bond_sign: np.ndarray  # common sign of t^L and t^R on each bond

    @property
    def offdiag(self) -> np.ndarray:
        """Off-diagonal of D^-1 H D."""
        return self.bond_sign * self.tau

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    residual: float  # RMS


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float  # log C in d_j ~ C j^eta
    residual: float


def skin_exponent(params: ChainParams) -> float:
    """eta = gamma / F2."""
    if not params.has_gradient:
        raise ParameterError("F2 = 0: the algebraic exponent is undefined (uniform chain)")
    return params.gamma / params.F2


def require_gauge_regime(params: ChainParams) -> None:
    """Raise unless F2 != 0 and every bond product is positive."""
    if not params.has_gradient:
        raise ParameterError("F2 = 0: the graded similarity gauge is undefined")
    bonds = detect_decoupling_bonds(params)
    if bonds:
        shown = ", ".join(str(j) for j in bonds[:10])
        more = "" if len(bonds) <= 10 else f" (+{len(bonds) - 10} more)"
        raise DecouplingError(f"nonpositive bond product t^L*t^R on bond(s) {shown}{more}", bonds=bonds)


def gauge_product(params: ChainParams) -> SimilarityGauge:
    """d_j = prod_{m<j} sqrt(t_m^R / t_m^L), accumulated in log space."""
    require_gauge_regime(params)
    hoppings = build_hoppings(params)
    increments = 0.5 * np.log(hoppings.right / hoppings.left)
    log_d = np.concatenate(([0.0], np.cumsum(increments)))
    return SimilarityGauge(log_d=log_d, eta=skin_exponent(params))


def _check_gamma_poles(arguments: np.ndarray) -> None:
    nearest = np.round(arguments)
    poles = (arguments <= 0.0) & (np.abs(arguments - nearest) <= 1e-12 * np.maximum(1.0, np.abs(arguments)))
    if np.any(poles):
        argument = float(arguments[np.flatnonzero(poles)[0]])
        raise GammaPoleError(f"Gamma function pole at argument {argument:.17g}", argument=argument)


def gauge_closed_form(params: ChainParams) -> SimilarityGauge:
    """
    log d_j = 1/2 [lnG(j+a) - lnG(1+a) + lnG(1+b) - lnG(j+b)], a = (J+gamma)/F2, b = (J-gamma)/F2.

    gammaln returns log|Gamma|, which is what the product needs when both
    amplitudes of a bond share a negative sign.
    """
    require_gauge_regime(params)
    a = (params.J + params.gamma) / params.F2
    b = (params.J - params.gamma) / params.F2
    j = site_indices(params.N)
    _check_gamma_poles(j + a)
    _check_gamma_poles(j + b)
    log_d = 0.5 * (gammaln(j + a) - gammaln(1.0 + a) + gammaln(1.0 + b) - gammaln(j + b))
    log_d[0] = 0.0
    return SimilarityGauge(log_d=log_d, eta=skin_exponent(params))


def local_log_increment(params: ChainParams, j: int) -> float:
    """1/2 ln((J+gamma+jF2)/(J-gamma+jF2)) for bond j (1-based)."""
    if not 1 <= j <= params.N - 1:
        raise ParameterError(f"bond index {j} outside 1..{params.N - 1}")
    left = params.J - params.gamma + j * params.F2
    right = params.J + params.gamma + j * params.F2
    if left == 0.0 or right / left <= 0.0:
        raise DecouplingError(f"nonpositive hopping ratio on bond {j}", bonds=[j])
    return 0.5 * float(np.log(right / left))


def transform_chain(params: ChainParams) -> TransformedChain:
    require_gauge_regime(params)
    hoppings = build_hoppings(params)
    tau = np.sqrt(hoppings.products)
    return TransformedChain(
        tau=tau,
        diag=params.F1 * site_indices(params.N),
        bond_sign=np.sign(hoppings.left),
    )


def map_eigenvector(
    gauge: SimilarityGauge,
    phi: np.ndarray,
    direction: Literal["right", "left"],
) -> np.ndarray:
    """psi^R = D phi, psi^L = D^-1 phi; phi may hold one state or states as columns."""
    phi = np.asarray(phi)
    if phi.shape[0] != gauge.log_d.shape[0]:
        raise ParameterError(f"vector length {phi.shape[0]} does not match chain length {gauge.log_d.shape[0]}")
    if direction == "right":
        factor = np.exp(gauge.log_d)
    elif direction == "left":
        factor = np.exp(-gauge.log_d)
    else:
        raise ParameterError(f"direction must be 'right' or 'left', got {direction!r}")
    if phi.ndim == 2:
        factor = factor[:, None]
    return factor * phi


def gauge_identity_residual(params: ChainParams, gauge: SimilarityGauge) -> float:
    """Largest relative mismatch of t^L d_{j+1}/d_j and t^R d_j/d_{j+1} against the signed tau_j."""
    hoppings = build_hoppings(params)
    target = transform_chain(params).offdiag
    step = np.exp(gauge.log_increments)
    lhs = hoppings.left * step
    rhs = hoppings.right / step
    scale = np.abs(target)
    return float(max(np.max(np.abs(lhs - target) / scale), np.max(np.abs(rhs - target) / scale)))


def fit_linear(x: np.ndarray, y: np.ndarray) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ParameterError(f"a linear fit needs at least 2 points, got {x.size}")
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return LinearFit(slope=float(slope), intercept=float(intercept), residual=residual)


def fit_through_origin(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 1 or not np.any(x):
        raise ParameterError("a fit through the origin needs a nonzero abscissa")
    return float(np.dot(x, y) / np.dot(x, x))


def _window_slice(window: Tuple[int, int], length: int) -> slice:
    lo, hi = window
    if lo < 1 or hi > length or hi - lo + 1 < 2:
        raise ParameterError(f"window [{lo}, {hi}] must hold at least 2 indices inside 1..{length}")
    return slice(lo - 1, hi)


def fit_power_law(values: np.ndarray, window: Tuple[int, int]) -> PowerLawFit:
    """Least squares of log(value) against log(index) over a 1-based inclusive window."""
    values = np.asarray(values, dtype=float)
    window_slice = _window_slice(window, values.size)
    sampled = values[window_slice]
    if np.any(sampled <= 0.0):
        raise ParameterError("power-law fit needs positive values")
    j = np.arange(window[0], window[1] + 1, dtype=float)
    line = fit_linear(np.log(j), np.log(sampled))
    return PowerLawFit(exponent=line.slope, intercept=line.intercept, residual=line.residual)


def fit_log_power_law(log_values: np.ndarray, window: Tuple[int, int]) -> PowerLawFit:
    """Same as fit_power_law but takes log(value), for gauges too large to exponentiate."""
    log_values = np.asarray(log_values, dtype=float)
    window_slice = _window_slice(window, log_values.size)
    j = np.arange(window[0], window[1] + 1, dtype=float)
    line = fit_linear(np.log(j), log_values[window_slice])
    return PowerLawFit(exponent=line.slope, intercept=line.intercept, residual=line.residual)


def fit_log_increment(gauge: SimilarityGauge, window: Tuple[int, int]) -> Tuple[LinearFit, float]:
    """Fit ln(d_{j+1}/d_j) against 1/j over a bond window; returns the raw fit and the through-origin slope."""
    increments = gauge.log_increments
    window_slice = _window_slice(window, increments.size)
    inv_j = 1.0 / np.arange(window[0], window[1] + 1, dtype=float)
    sampled = increments[window_slice]
    fit = fit_linear(inv_j, sampled)
    logger.debug(f"increment fit over bonds {window}: slope={fit.slope:.6f}, intercept={fit.intercept:.3e}")
    return fit, fit_through_origin(inv_j, sampled)
