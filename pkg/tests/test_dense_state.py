import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fafkit.algebra import majorana_string
from fafkit.dense_state import (
    StateVector,
    apply_unitary,
    covariance_matrix,
    dump_state,
    entanglement_entropy,
    expectation,
    haar_state,
    load_state,
    prepare_named,
)
from fafkit.free_fermion import apply_matchgate_circuit, random_matchgate_circuit
from fafkit.nongauss import vacuum_covariance

from conftest import PAULI_Z, covariance_oracle, kron_all


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_covariance_matches_brute_force(n, seed):
    psi = haar_state(n, "generic", seed)
    np.testing.assert_allclose(covariance_matrix(psi), covariance_oracle(psi.amplitudes, n), atol=1e-12)


def test_vacuum_covariance():
    np.testing.assert_allclose(covariance_matrix(prepare_named("vacuum", n_qubits=3)), vacuum_covariance(3))


@pytest.mark.parametrize("n", [2, 5, 8])
def test_even_sector_haar_states_have_positive_parity(n, rng):
    psi = haar_state(n, "even", rng)
    parity = kron_all([PAULI_Z] * n) if n <= 5 else None
    if parity is not None:
        assert np.vdot(psi.amplitudes, parity @ psi.amplitudes).real == pytest.approx(1.0)
    odd = np.array([bin(i).count("1") % 2 for i in range(1 << n)], dtype=bool)
    assert np.abs(psi.amplitudes[odd]).max() == 0.0


def test_psi_theta_amplitudes():
    amps = prepare_named("psi_theta", theta=math.pi / 3).amplitudes
    assert np.count_nonzero(np.abs(amps) > 1e-15) == 4
    assert amps[0b1111] == pytest.approx(0.5 * np.exp(1j * math.pi / 3))


def test_t_product_single_qubit_amplitudes():
    psi = prepare_named("t_product", theta=0.8, phi=0.3, n_qubits=1)
    np.testing.assert_allclose(psi.amplitudes, [math.cos(0.4), np.exp(0.3j) * math.sin(0.4)])


def test_pe_ground_is_normalized_and_even():
    psi = prepare_named("pe_ground", theta=1.1, n_qubits=6)
    odd = np.array([bin(i).count("1") % 2 for i in range(64)], dtype=bool)
    assert np.abs(psi.amplitudes[odd]).max() < 1e-15


def test_apply_unitary_on_non_adjacent_qubits(rng):
    psi = haar_state(3, "generic", rng)
    cnot = np.eye(4)[[0, 1, 3, 2]]
    out = apply_unitary(psi, cnot, (3, 1))
    # CNOT with control 3, target 1, as a permutation of basis states.
    expected = np.zeros(8, dtype=complex)
    for i in range(8):
        b1, b3 = (i >> 2) & 1, i & 1
        j = i ^ (b3 << 2)
        expected[j] = psi.amplitudes[i]
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-14)


def test_expectation_of_majorana_bilinear(rng):
    psi = haar_state(3, "generic", rng)
    op = majorana_string([2, 5], 3).scaled(3)
    assert expectation(psi, op).real == pytest.approx(covariance_matrix(psi)[1, 4])


def test_bell_state_entropy_is_one_bit():
    psi = StateVector.from_amplitudes(np.array([1, 0, 0, 1]))
    assert entanglement_entropy(psi, 1) == pytest.approx(1.0)


def test_dump_load_round_trip(tmp_path, rng):
    psi = haar_state(4, "generic", rng)
    path = tmp_path / "state.bin"
    dump_state(psi, path)
    raw = path.read_bytes()
    assert len(raw) == 8 + 16 * 16
    np.testing.assert_array_equal(load_state(path).amplitudes, psi.amplitudes)


def test_load_rejects_bad_tag(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"\x01\x00\x00\x00XX\x00\x00" + bytes(32))
    with pytest.raises(ValueError):
        load_state(path)


def test_wick_theorem_on_gaussian_states(rng):
    n = 4
    psi = apply_matchgate_circuit(prepare_named("vacuum", n_qubits=n), random_matchgate_circuit(n, 20, rng, reflection_rate=0.0))
    m = covariance_matrix(psi)
    for a, b, c, d in [(1, 2, 3, 4), (1, 3, 5, 8), (2, 4, 6, 7), (1, 5, 6, 8)]:
        four = expectation(psi, majorana_string([a, b, c, d], n)).real
        # <g_a g_b g_c g_d> = -(M_ab M_cd - M_ac M_bd + M_ad M_bc) with M = <-i g g>.
        pf = m[a - 1, b - 1] * m[c - 1, d - 1] - m[a - 1, c - 1] * m[b - 1, d - 1] + m[a - 1, d - 1] * m[b - 1, c - 1]
        assert four == pytest.approx(-pf, abs=1e-10)


@pytest.mark.parametrize(
    "call",
    [
        lambda: StateVector(2, np.ones(3)),
        lambda: StateVector(1, np.ones(2)),
        lambda: prepare_named("psi_theta_product", n_qubits=6),
        lambda: prepare_named("nonsense"),
        lambda: haar_state(3, "odd"),
        lambda: apply_unitary(prepare_named("vacuum", n_qubits=2), np.eye(4), (1, 1)),
        lambda: entanglement_entropy(prepare_named("vacuum", n_qubits=2), 2),
    ],
)
def test_invalid_input_raises(call):
    with pytest.raises((ValueError, IndexError)):
        call()


def test_dense_cap():
    with pytest.raises(MemoryError):
        haar_state(40)
