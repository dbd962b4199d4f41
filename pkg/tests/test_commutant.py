import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fafkit.commutant import (
    ReplicaSpec,
    comm1_invariant_strings,
    comm2_collapse_check,
    comm2_collapse_factor,
    comm2_independent_count,
    comm2_q_operators,
    invariance_check,
    normalization,
    phi_measure,
    replica_operator,
    zeta_overlap,
)
from fafkit.dense_state import StateVector, covariance_matrix, haar_state, prepare_named
from fafkit.free_fermion import Reflection, apply_matchgate_circuit, matchgate_unitary, random_matchgate_circuit
from fafkit.nongauss import faf

from conftest import kron_all


def _replica_expectation(psi: StateVector, spec: tuple[int, ...]) -> float:
    copies = kron_all([psi.amplitudes] * len(spec))
    value = np.vdot(copies, replica_operator(psi.n_qubits, spec) @ copies)
    assert abs(value.imag) < 1e-9
    return float(value.real)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_phi_11_is_twice_f1(n, seed):
    psi = haar_state(n, "generic", seed)
    assert phi_measure(psi, (1, 1)) == pytest.approx(2 * faf(covariance_matrix(psi), 1), abs=1e-9)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_phi_1111_is_twice_f2(n, seed):
    psi = haar_state(n, "generic", seed)
    assert phi_measure(psi, (1, 1, 1, 1)) == pytest.approx(2 * faf(covariance_matrix(psi), 2), abs=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_normalization_of_pair_spec_is_2n(n):
    assert normalization(n, (1, 1)) == pytest.approx(2 * n)


@pytest.mark.parametrize(("n", "expected"), [(2, 6.0), (3, 18.0), (4, 36.0), (5, 60.0), (6, 90.0)])
def test_normalization_of_22_spec(n, expected):
    assert normalization(n, (2, 2)) == pytest.approx(expected)


def test_odd_total_size_has_zero_normalization():
    assert normalization(3, (1, 2)) == 0.0


@pytest.mark.parametrize("spec", [(1, 1), (2, 2), (1, 2), (2, 1, 1), (1, 1, 1, 1), (3, 1)])
def test_chain_trace_matches_dense_replica_operator(spec, rng):
    psi = haar_state(2, "generic", rng)
    assert zeta_overlap(psi, spec) == pytest.approx(_replica_expectation(psi, spec), abs=1e-10)


def test_normalization_matches_dense_vacuum_expectation():
    vacuum = prepare_named("vacuum", n_qubits=3)
    assert normalization(3, (2, 2)) == pytest.approx(_replica_expectation(vacuum, (2, 2)))


@pytest.mark.parametrize("spec", [(1, 1), (2, 2), (1, 1, 1, 1)])
def test_phi_vanishes_on_gaussian_states(spec, rng):
    n = 3
    psi = apply_matchgate_circuit(prepare_named("vacuum", n_qubits=n), random_matchgate_circuit(n, 25, rng, reflection_rate=0.1))
    assert phi_measure(psi, spec) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("generator", ["circuit", "rotation", "reflection"])
def test_invariance_under_gaussian_unitaries(generator):
    assert invariance_check((2, 2), 3, trials=4, seed=7, generator=generator) < 1e-9


def test_invariance_check_rejects_unknown_generator():
    with pytest.raises(ValueError):
        invariance_check((1, 1), 2, trials=1, generator="swap")


def test_phi_22_is_blind_to_a_non_gaussian_state():
    psi4 = prepare_named("psi_theta", theta=math.pi / 2).amplitudes
    vac2 = np.zeros(4, dtype=complex)
    vac2[0] = 1.0
    psi = StateVector.from_amplitudes(np.kron(psi4, vac2))
    assert abs(phi_measure(psi, (2, 2))) < 1e-9
    assert faf(covariance_matrix(psi), 1) == pytest.approx(2.0)


@pytest.mark.parametrize(("pad", "expected"), [(0, -24.0), (1, -12.0), (2, 0.0)])
def test_phi_22_of_theta_state_changes_sign_with_padding(pad, expected):
    amps = prepare_named("psi_theta", theta=math.pi / 2).amplitudes
    padded = np.kron(amps, np.eye(1 << pad)[0]) if pad else amps
    assert phi_measure(StateVector.from_amplitudes(padded), (2, 2)) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize(("n", "m", "r", "factor"), [(3, 2, 1, -2.0), (3, 4, 1, -4.0), (3, 4, 2, 6.0), (2, 3, 1, 3.0)])
def test_two_replica_collapse_factors(n, m, r, factor):
    assert comm2_collapse_factor(n, m, r) == pytest.approx(factor)
    assert comm2_collapse_check(n, m, r)


def test_collapse_factor_argument_range():
    with pytest.raises(ValueError):
        comm2_collapse_factor(2, 2, 3)


@pytest.mark.parametrize(("n", "count"), [(2, 5), (3, 7)])
def test_independent_two_replica_count_is_2n_plus_1(n, count):
    assert comm2_independent_count(n) == count


def test_q_operators_commute_with_doubled_gaussian_unitaries(rng):
    circuits = [random_matchgate_circuit(2, 10, rng, reflection_rate=0.2) for _ in range(3)] + [[Reflection(4)]]
    for circuit in circuits:
        u = matchgate_unitary(circuit, 2)
        uu = np.kron(u, u)
        for q in comm2_q_operators():
            np.testing.assert_allclose(uu @ q, q @ uu, atol=1e-12)


@pytest.mark.parametrize(("m", "sign"), [(0, 1), (1, 1), (2, -1), (3, -1), (4, 1)])
def test_q_operators_are_signed_replica_operators(m, sign):
    q = comm2_q_operators()[m]
    upsilon = np.eye(16) if m == 0 else replica_operator(2, (m, 0))
    np.testing.assert_allclose(q, sign * upsilon, atol=1e-12)


def test_q_operators_are_independent():
    qs = np.array([q.reshape(-1) for q in comm2_q_operators()])
    assert np.linalg.matrix_rank(qs) == 5


@pytest.mark.parametrize("n", [1, 2, 3])
def test_only_identity_survives_in_single_replica_commutant(n):
    assert comm1_invariant_strings(n) == [()]


@pytest.mark.parametrize("r", [(1,), (0, 0), (-1, 2)])
def test_replica_spec_validation(r):
    with pytest.raises(ValueError):
        ReplicaSpec(r)


def test_replica_spec_size_checks():
    with pytest.raises(ValueError):
        ReplicaSpec((3, 2)).check(2)
    with pytest.raises(MemoryError):
        ReplicaSpec((4, 4)).check(7)
    with pytest.raises(MemoryError):
        replica_operator(4, (1, 1, 1))


def test_replica_spec_pairs_are_cyclic():
    assert ReplicaSpec((1, 2, 3)).pairs() == [(1, 2), (2, 3), (3, 1)]
