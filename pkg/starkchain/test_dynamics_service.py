"""
Tests for the Gaussian orbital evolution: propagator, QR restabilization,
normalized projector and entanglement traces.
"""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import expm

from starkchain.core.errors import NumericalError, ParameterError, RankCollapseError
from starkchain.models import ChainParams, OrbitalState
from starkchain.services.chain_service import build_cdw_orbitals, build_hamiltonian
from starkchain.services.dynamics_service import (
    GaussianProjector,
    Propagator,
    entropy_trace,
    excess_entropy,
    normalized_projector,
    propagator,
    step,
    subsystem_entropy,
)

FIG3 = ChainParams(N=120, J=-1.0, gamma=0.0, F1=0.16, F2=0.08)


def random_orbitals(rng: np.random.Generator, N: int, Np: int) -> np.ndarray:
    return rng.normal(size=(N, Np)) + 1j * rng.normal(size=(N, Np))


def fock_oracle(U: np.ndarray):
    """Dense Fock-space norm and <c_i^dagger c_j> of the Slater determinant built from U."""
    N, Np = U.shape
    amplitudes = {S: np.linalg.det(U[list(S), :]) for S in itertools.combinations(range(N), Np)}
    norm = sum(abs(a) ** 2 for a in amplitudes.values())
    C = np.zeros((N, N), dtype=complex)
    for S, amplitude in amplitudes.items():
        for j in S:
            sign_j = (-1) ** sum(1 for s in S if s < j)
            rest = tuple(s for s in S if s != j)
            for i in range(N):
                if i in rest:
                    continue
                sign_i = (-1) ** sum(1 for s in rest if s < i)
                target = tuple(sorted(rest + (i,)))
                C[i, j] += np.conj(amplitudes[target]) * sign_i * sign_j * amplitude
    return norm, C / norm


def test_projector_matches_fock_space():
    rng = np.random.default_rng(3)
    U = random_orbitals(rng, 8, 3)
    norm, C = fock_oracle(U)
    state = OrbitalState(U=U)
    proj = normalized_projector(state)
    np.testing.assert_allclose(proj.C, C, rtol=0, atol=1e-10)
    assert abs(state.gram_determinant() - norm) <= 1e-10 * norm


def test_projector_invariants():
    rng = np.random.default_rng(8)
    proj = normalized_projector(OrbitalState(U=random_orbitals(rng, 12, 5)))
    assert proj.idempotency_defect() <= 1e-10
    assert proj.hermiticity_defect() <= 1e-10
    assert proj.trace == pytest.approx(5.0, abs=1e-8)


def test_projector_basis_invariance():
    rng = np.random.default_rng(21)
    U = random_orbitals(rng, 10, 4)
    B = random_orbitals(rng, 4, 4) + 3.0 * np.eye(4)
    original = normalized_projector(OrbitalState(U=U)).P
    rotated = normalized_projector(OrbitalState(U=U @ B)).P
    np.testing.assert_allclose(rotated, original, rtol=0, atol=1e-10)


def test_projector_of_orthonormal_orbitals():
    state = build_cdw_orbitals(6)
    proj = normalized_projector(state)
    np.testing.assert_allclose(proj.P, state.U @ state.U.conj().T, atol=1e-15)

    single = np.zeros((5, 1))
    single[2, 0] = 1.0
    C = normalized_projector(OrbitalState(U=single)).C
    expected = np.zeros((5, 5))
    expected[2, 2] = 1.0
    np.testing.assert_allclose(C, expected, atol=1e-15)


def test_ill_conditioned_orbitals_take_the_qr_route():
    rng = np.random.default_rng(4)
    U = random_orbitals(rng, 10, 3)
    skewed = U @ np.diag([1.0, 1e-5, 1e5])
    np.testing.assert_allclose(
        normalized_projector(OrbitalState(U=skewed)).P,
        normalized_projector(OrbitalState(U=U)).P,
        atol=1e-10,
    )


def test_singular_gram_matrix():
    U = np.ones((6, 2))
    with pytest.raises(RankCollapseError):
        normalized_projector(OrbitalState(U=U))


def test_rank_collapse_reports_smallest_singular_value():
    U = np.zeros((4, 2))
    U[0, 0] = 2.0
    U[1, 1] = 1e-15
    state = OrbitalState(U=U, t=0.5)
    np.testing.assert_allclose(state.singular_values(), [2.0, 1e-15])
    with pytest.raises(RankCollapseError) as excinfo:
        normalized_projector(state)
    assert excinfo.value.smallest == state.smallest_singular_value()
    assert state.smallest_singular_value() == pytest.approx(1e-15, rel=1e-6)
    assert excinfo.value.time == 0.5


def test_hermitian_propagator_is_unitary():
    prop = propagator(ChainParams(N=20, J=-1.0, gamma=0.0, F1=0.16, F2=0.08), 0.02)
    assert prop.route == "eigh"
    np.testing.assert_allclose(prop.matrix.conj().T @ prop.matrix, np.eye(20), atol=1e-10)


def test_zero_hamiltonian_propagator():
    prop = propagator(ChainParams(N=5, J=0.0, gamma=0.0, F1=0.0, F2=0.0), 0.3)
    np.testing.assert_allclose(prop.matrix, np.eye(5), atol=1e-15)


@pytest.mark.parametrize(
    "params,route",
    [
        (ChainParams(N=10, J=-1.0, gamma=0.0, F1=0.3, F2=0.2), "eigh"),
        (ChainParams(N=10, J=1.0, gamma=0.2, F1=0.3, F2=0.5), "gauge"),
        (ChainParams(N=10, J=1.0, gamma=0.3, F1=0.2, F2=0.0), "expm"),
    ],
)
def test_propagator_routes_agree_with_expm(params, route):
    dt = 0.05
    prop = propagator(params, dt)
    assert prop.route == route
    reference = expm(-1j * dt * build_hamiltonian(params).entries)
    assert np.max(np.abs(prop.matrix - reference)) <= 1e-10 * np.max(np.abs(reference))

    doubled = propagator(params, 2 * dt).matrix
    np.testing.assert_allclose(prop.matrix @ prop.matrix, doubled, rtol=0, atol=1e-9)


def test_propagator_rejects_nonpositive_dt():
    with pytest.raises(ParameterError):
        propagator(FIG3, 0.0)


def test_restabilized_step_is_orthonormal_and_preserves_projector():
    params = ChainParams(N=20, J=1.0, gamma=0.3, F1=0.1, F2=0.2)
    prop = propagator(params, 0.1)
    rng = np.random.default_rng(12)
    state = OrbitalState(U=random_orbitals(rng, 20, 6))
    raw = step(state, prop, restabilize=False)
    stable = step(state, prop, restabilize=True)
    assert stable.t == pytest.approx(0.1)
    np.testing.assert_allclose(stable.U.conj().T @ stable.U, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(normalized_projector(stable).P, normalized_projector(raw).P, atol=1e-10)

    hermitian = propagator(ChainParams(N=20, J=1.0, gamma=0.0, F1=0.1, F2=0.2), 0.1)
    Q = step(build_cdw_orbitals(20), hermitian, restabilize=True).U
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(10), atol=1e-12)


def test_zero_step_leaves_state_unchanged():
    state = build_cdw_orbitals(8)
    after = step(state, Propagator.identity(8), restabilize=True)
    np.testing.assert_allclose(after.U, state.U, atol=1e-14)
    assert after.t == 0.0


def test_rank_collapse_is_reported():
    U = np.zeros((6, 2), dtype=complex)
    U[0, 0] = U[0, 1] = 1.0
    with pytest.raises(RankCollapseError) as exc:
        step(OrbitalState(U=U, t=1.0), Propagator.identity(6), restabilize=True)
    assert exc.value.time == 1.0


def test_hermitian_evolution_conserves_the_gram_matrix():
    params = ChainParams(N=20, J=-1.0, gamma=0.0, F1=0.16, F2=0.08)
    prop = propagator(params, 0.02)
    state = build_cdw_orbitals(20)
    for _ in range(400):
        state = step(state, prop, restabilize=False)
    assert state.t == pytest.approx(8.0)
    np.testing.assert_allclose(state.gram(), np.eye(10), atol=1e-9)


def test_entropy_examples():
    cdw = normalized_projector(build_cdw_orbitals(10))
    assert subsystem_entropy(cdw, range(0, 5)) == 0.0
    assert subsystem_entropy(cdw, [1, 2, 7]) == 0.0

    pair = normalized_projector(OrbitalState(U=np.array([[1.0], [1.0]]) / math.sqrt(2.0)))
    assert subsystem_entropy(pair, [0]) == pytest.approx(math.log(2.0), abs=1e-12)

    with pytest.raises(ParameterError):
        subsystem_entropy(cdw, [])
    with pytest.raises(ParameterError):
        subsystem_entropy(cdw, [10])


def test_entropy_rejects_non_hermitian_correlations():
    P = np.eye(4, dtype=complex)
    P[0, 1] = 0.1
    with pytest.raises(NumericalError):
        subsystem_entropy(GaussianProjector(P=P), [0, 1])


def test_static_chain_has_no_entanglement():
    trace = entropy_trace(ChainParams(N=8, J=0.0, gamma=0.0, F1=0.0, F2=0.0), 1.0, 0.1, build_cdw_orbitals(8))
    np.testing.assert_allclose(trace.S, 0.0, atol=1e-12)
    assert trace.times.size == 11


def test_hermitian_trace_needs_no_restabilization():
    params = ChainParams(N=20, J=-1.0, gamma=0.0, F1=0.16, F2=0.08)
    initial = build_cdw_orbitals(20)
    every_step = entropy_trace(params, 2.0, 0.02, initial, restabilize_every=1)
    never = entropy_trace(params, 2.0, 0.02, initial, restabilize_every=10 ** 6)
    np.testing.assert_allclose(every_step.S, never.S, rtol=0, atol=1e-9)


def test_restabilization_cadence_is_invisible():
    params = ChainParams(N=40, J=1.0, gamma=0.1, F1=0.1, F2=0.05)
    initial = build_cdw_orbitals(40)
    every_step = entropy_trace(params, 4.0, 0.02, initial, restabilize_every=1)
    every_tenth = entropy_trace(params, 4.0, 0.02, initial, restabilize_every=10)
    np.testing.assert_allclose(every_step.S, every_tenth.S, rtol=0, atol=1e-8)
    assert every_step.projector_defect.max() <= 1e-10
    assert np.all(every_step.S >= 0.0)
    assert np.all(every_step.S <= 20 * math.log(2.0))


def test_trace_rejects_bad_arguments():
    initial = build_cdw_orbitals(8)
    params = ChainParams(N=8, J=1.0, gamma=0.0, F1=0.0, F2=0.1)
    with pytest.raises(ParameterError):
        entropy_trace(params, 0.0, 0.02, initial)
    with pytest.raises(ParameterError):
        entropy_trace(params, 1.0, 0.02, initial, restabilize_every=0)
    with pytest.raises(ParameterError):
        entropy_trace(params, 1.0, 0.02, build_cdw_orbitals(10))


def test_excess_entropy_identities():
    params = ChainParams(N=8, J=1.0, gamma=0.0, F1=0.1, F2=0.1)
    trace = entropy_trace(params, 1.0, 0.1, build_cdw_orbitals(8))
    np.testing.assert_array_equal(excess_entropy(trace, trace, trace), np.zeros(trace.times.size))

    shifted = replace(trace, S=trace.S + 0.25)
    np.testing.assert_allclose(excess_entropy(shifted, trace, trace), 0.25, rtol=1e-14)

    coarse = entropy_trace(params, 1.0, 0.2, build_cdw_orbitals(8))
    with pytest.raises(ParameterError):
        excess_entropy(trace, coarse, trace)


@pytest.mark.slow
def test_threshold_trace_leads_at_late_times():
    initial = build_cdw_orbitals(120)
    traces = [entropy_trace(FIG3.with_ratio(r), 8.0, 0.02, initial) for r in (1.0, 2.0, 3.0)]
    for trace in traces:
        assert trace.S[0] <= 1e-12
        assert trace.projector_defect.max() <= 1e-10
    assert traces[1].S[-1] > traces[1].S[0]

    delta = excess_entropy(traces[1], traces[0], traces[2])
    times = traces[1].times
    late = (times >= 6.0 - 1e-9) & (times <= 8.0 + 1e-9)
    assert late.sum() == 101
    assert np.all(delta[late] > 0.0)
