"""
Dynamics Service - free-fermion Gaussian evolution
Evolves the occupied orbitals with U(t) = exp(-iht) U(0), keeps the normalized
projector P = U (U^dagger U)^-1 U^dagger well conditioned through QR
restabilization, and samples the half-chain entanglement entropy.

QR only changes the basis of the occupied subspace, so P (and C = P^T) is unchanged.
"""

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.special import xlogy

from starkchain.core.config import get_settings
from starkchain.core.errors import NumericalError, ParameterError, RankCollapseError, StarkChainError
from starkchain.core.logging import get_logger
from starkchain.models import ChainParams, OrbitalState
from starkchain.services.chain_service import build_hamiltonian, detect_decoupling_bonds, half_chain
from starkchain.services.gauge_service import gauge_product, transform_chain

logger = get_logger(__name__)

HERMITICITY_LIMIT = 1e-8
PROJECTOR_LIMIT = 1e-10


@dataclass(frozen=True)
class Propagator:
    matrix: np.ndarray
    dt: float
    route: Literal["eigh", "gauge", "expm", "identity"] = "expm"

    @classmethod
    def identity(cls, N: int) -> "Propagator":
        return cls(matrix=np.eye(N, dtype=complex), dt=0.0, route="identity")


@dataclass(frozen=True)
class GaussianProjector:
    P: np.ndarray

    @property
    def C(self) -> np.ndarray:
        """Correlation matrix C_ij = <c_i^dagger c_j>."""
        return self.P.T

    @property
    def trace(self) -> float:
        return float(np.trace(self.P).real)

    def idempotency_defect(self) -> float:
        return float(np.max(np.abs(self.P @ self.P - self.P)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.P - self.P.conj().T)))


@dataclass(frozen=True)
class EntropyTrace:
    times: np.ndarray
    S: np.ndarray                 # nats
    params: ChainParams
    cut: range                    # storage indices of subsystem A
    projector_defect: np.ndarray  # max |P^2 - P| at every sample
    dt: float
    restabilize_every: int


def propagator(params: ChainParams, dt: float) -> Propagator:
    """
    exp(-i h dt) for the one-body matrix h.

    gamma = 0: symmetric eigendecomposition. Otherwise, in the positive gauge
    regime, exp(-i h dt) = D exp(-i h~ dt) D^-1 with the D factors applied as
    exp(log d_i - log d_j). Anything else falls back to scaling and squaring.
    """
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    h = build_hamiltonian(params).entries
    if not np.all(np.isfinite(h)):
        raise NumericalError("one-body matrix has non-finite entries")

    if params.gamma == 0.0:
        energies, vectors = np.linalg.eigh(h.real)
        matrix = (vectors * np.exp(-1j * energies * dt)) @ vectors.T
        route = "eigh"
    elif params.has_gradient and not detect_decoupling_bonds(params):
        chain = transform_chain(params)
        log_d = gauge_product(params).log_d
        energies, vectors = eigh_tridiagonal(chain.diag, chain.offdiag)
        core = (vectors * np.exp(-1j * energies * dt)) @ vectors.T
        matrix = np.exp(log_d[:, None] - log_d[None, :]) * core
        route = "gauge"
    else:
        matrix = expm(-1j * dt * h)
        route = "expm"

    if not np.all(np.isfinite(matrix)):
        raise NumericalError(f"propagator ({route}) produced non-finite entries at dt={dt}")
    logger.debug(f"propagator built via {route} route, dt={dt}")
    return Propagator(matrix=matrix, dt=dt, route=route)


def _positive_qr(U: np.ndarray, rank_floor: float, t: float) -> np.ndarray:
    """Orthonormal Q spanning U, with R's diagonal made real positive."""
    Q, R = np.linalg.qr(U)
    diag = np.diag(R)
    smallest = float(np.min(np.abs(diag)))
    if smallest < rank_floor * np.linalg.norm(U):
        raise RankCollapseError(
            f"orbital matrix lost rank at t={t:.6g}: smallest |R_ii| = {smallest:.3e}",
            smallest=smallest, time=t,
        )
    return Q * (diag / np.abs(diag))[None, :]


def step(state: OrbitalState, prop: Propagator, restabilize: bool = True) -> OrbitalState:
    """U <- exp(-i h dt) U, optionally replaced by its orthonormal QR factor."""
    U = prop.matrix @ state.U
    t = state.t + prop.dt
    if restabilize:
        U = _positive_qr(U, get_settings().rank_floor, t)
    return OrbitalState(U=U, t=t)


def normalized_projector(state: OrbitalState) -> GaussianProjector:
    """P = U M^-1 U^dagger with M = U^dagger U; QR route (P = Q Q^dagger) when M is ill conditioned."""
    cfg = get_settings()
    U = state.U
    singular = state.singular_values()
    smallest = float(singular[-1])
    if smallest <= cfg.rank_floor * singular[0]:
        raise RankCollapseError(
            f"singular Gram matrix at t={state.t:.6g}: smallest singular value {smallest:.3e}",
            smallest=smallest, time=state.t,
        )
    if (singular[0] / smallest) ** 2 > cfg.gram_cond_limit:
        Q = _positive_qr(U, cfg.rank_floor, state.t)
        P = Q @ Q.conj().T
    else:
        P = U @ np.linalg.solve(state.gram(), U.conj().T)
    return GaussianProjector(P=0.5 * (P + P.conj().T))


def subsystem_entropy(proj: GaussianProjector, A: Sequence[int], eps: Optional[float] = None) -> float:
    """
    Von Neumann entropy of sites A (storage indices) from the restricted correlation matrix.

    Eigenvalues within eps of 0 or 1 are snapped there, so pure modes add exactly 0.
    """
    eps = get_settings().entropy_eps if eps is None else eps
    sites = np.asarray(list(A), dtype=int)
    N = proj.P.shape[0]
    if sites.size == 0 or sites.min() < 0 or sites.max() >= N:
        raise ParameterError(f"subsystem must be a nonempty subset of sites 0..{N - 1}")
    C_A = proj.C[np.ix_(sites, sites)]
    defect = float(np.max(np.abs(C_A - C_A.conj().T)))
    if defect > HERMITICITY_LIMIT:
        raise NumericalError(f"restricted correlation matrix not Hermitian (defect {defect:.3e})")
    lam = np.clip(np.linalg.eigvalsh(0.5 * (C_A + C_A.conj().T)), 0.0, 1.0)
    lam[lam < eps] = 0.0
    lam[lam > 1.0 - eps] = 1.0
    entropy = float(-np.sum(xlogy(lam, lam) + xlogy(1.0 - lam, 1.0 - lam)))
    return entropy if entropy > 0.0 else 0.0


def entropy_trace(
    params: ChainParams,
    t_max: float,
    dt: float,
    initial: OrbitalState,
    restabilize_every: int = 1,
) -> EntropyTrace:
    """Half-chain entropy S_{N/2}(t) sampled at every step of a fixed-dt evolution."""
    if not t_max > 0.0 or not dt > 0.0:
        raise ParameterError(f"t_max and dt must be positive, got t_max={t_max}, dt={dt}")
    if restabilize_every < 1:
        raise ParameterError(f"restabilize_every must be >= 1, got {restabilize_every}")
    if initial.n_sites != params.N:
        raise ParameterError(f"initial state has {initial.n_sites} sites, chain has {params.N}")

    prop = propagator(params, dt)
    n_steps = int(round(t_max / dt))
    times = np.arange(n_steps + 1) * dt
    cut = half_chain(params.N)
    entropies = np.empty(n_steps + 1)
    defects = np.empty(n_steps + 1)

    state = initial
    for k in range(n_steps + 1):
        try:
            if k > 0:
                state = step(state, prop, restabilize=(k % restabilize_every == 0))
            proj = normalized_projector(state)
            entropies[k] = subsystem_entropy(proj, cut)
        except RankCollapseError as e:
            raise RankCollapseError(f"{e.detail} (step {k}, t={times[k]:.6g})", smallest=e.smallest, time=float(times[k])) from e
        except StarkChainError as e:
            raise NumericalError(f"{e.detail} (step {k}, t={times[k]:.6g})") from e
        defects[k] = proj.idempotency_defect()
        if defects[k] > PROJECTOR_LIMIT:
            logger.warning(f"⚠️ projector idempotency defect {defects[k]:.3e} at t={times[k]:.6g}")

    logger.info(
        f"Entropy trace done: N={params.N}, F1/F2={params.F1 / params.F2 if params.has_gradient else float('nan'):.6g}, "
        f"{n_steps} steps, S(t_max)={entropies[-1]:.6f}"
    )
    return EntropyTrace(
        times=times, S=entropies, params=params, cut=cut, projector_defect=defects,
        dt=dt, restabilize_every=restabilize_every,
    )


def excess_entropy(trace_2: EntropyTrace, trace_1: EntropyTrace, trace_3: EntropyTrace) -> np.ndarray:
    """Delta S = S_2 - (S_1 + S_3) / 2 on a shared time grid."""
    if not (np.array_equal(trace_2.times, trace_1.times) and np.array_equal(trace_2.times, trace_3.times)):
        raise ParameterError("excess entropy needs identical time grids")
    return trace_2.S - 0.5 * (trace_1.S + trace_3.S)
