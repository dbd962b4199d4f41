import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fafkit.dense_state import covariance_matrix, haar_state, prepare_named
from fafkit.free_fermion import (
    DegenerateGroundState,
    PlaneRotation,
    QuadraticHamiltonian,
    Reflection,
    apply_matchgate_circuit,
    canonical_form,
    duality_permutation,
    gaussian_ground_state,
    ground_covariance,
    ising_critical_correlator,
    matchgate_to_orthogonal,
    matchgate_unitary,
    pe_covariance,
    pe_dual_covariance,
    random_matchgate_circuit,
    tfim_hamiltonian,
)
from fafkit.nongauss import faf

from conftest import PAULI_X, PAULI_Z, covariance_oracle, site_operator


def _kron_tfim(n: int, h_z: float, periodic: bool) -> np.ndarray:
    h = sum(-h_z * site_operator(PAULI_Z, m, n) for m in range(1, n + 1))
    for m in range(1, n):
        h = h - site_operator(PAULI_X, m, n) @ site_operator(PAULI_X, m + 1, n)
    if periodic:
        h = h - site_operator(PAULI_X, 1, n) @ site_operator(PAULI_X, n, n)
    return h


def _even_mask(n: int) -> np.ndarray:
    return np.array([bin(i).count("1") % 2 == 0 for i in range(1 << n)])


def _random_antisymmetric(n_modes: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n_modes, n_modes))
    return a - a.T


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_covariance_transforms_by_orthogonal_image(n, seed):
    rng = np.random.default_rng(seed)
    psi = haar_state(n, "generic", rng)
    circuit = random_matchgate_circuit(n, 12, rng, reflection_rate=0.2)
    g = matchgate_to_orthogonal(circuit, n)
    out = apply_matchgate_circuit(psi, circuit)
    np.testing.assert_allclose(covariance_oracle(out.amplitudes, n), g @ covariance_matrix(psi) @ g.T, atol=1e-10)


def test_matchgate_unitary_agrees_with_state_evolution(rng):
    n = 3
    circuit = random_matchgate_circuit(n, 15, rng, reflection_rate=0.3)
    u = matchgate_unitary(circuit, n)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    psi = haar_state(n, "generic", rng)
    np.testing.assert_allclose(apply_matchgate_circuit(psi, circuit).amplitudes, u @ psi.amplitudes, atol=1e-12)


def test_single_rotation_is_a_givens_matrix():
    g = matchgate_to_orthogonal([PlaneRotation(1, 2, 0.3)], 1)
    np.testing.assert_allclose(g, [[math.cos(0.3), math.sin(0.3)], [-math.sin(0.3), math.cos(0.3)]])


def test_reflection_of_last_mode_is_x_on_last_qubit(rng):
    psi = haar_state(2, "generic", rng)
    out = apply_matchgate_circuit(psi, [Reflection(4)])
    expected = site_operator(PAULI_X, 2, 2) @ psi.amplitudes
    overlap = np.vdot(expected, out.amplitudes)
    assert abs(overlap) == pytest.approx(1.0)


@pytest.mark.parametrize("gate", [lambda: PlaneRotation(2, 2, 0.1), lambda: PlaneRotation(0, 2, 0.1), lambda: Reflection(0)])
def test_gate_validation(gate):
    with pytest.raises(ValueError):
        gate()


def test_gate_outside_register_is_rejected():
    with pytest.raises(ValueError):
        matchgate_to_orthogonal([PlaneRotation(1, 5, 0.2)], 2)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_canonical_form_reconstructs_h(n, seed):
    h = _random_antisymmetric(2 * n, np.random.default_rng(seed))
    g, eps = canonical_form(h)
    np.testing.assert_allclose(g @ g.T, np.eye(2 * n), atol=1e-10)
    assert np.all(np.diff(eps) <= 1e-12) and np.all(eps >= 0)
    block = np.kron(np.diag(eps), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    np.testing.assert_allclose(g.T @ block @ g, h, atol=1e-9)


def test_canonical_form_with_zero_modes():
    h = np.zeros((6, 6))
    h[0, 3], h[3, 0] = 1.5, -1.5
    g, eps = canonical_form(h)
    np.testing.assert_allclose(eps, [1.5, 0.0, 0.0])
    block = np.kron(np.diag(eps), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    np.testing.assert_allclose(g.T @ block @ g, h, atol=1e-12)


def test_quadratic_hamiltonian_validation():
    with pytest.raises(ValueError):
        QuadraticHamiltonian(np.ones((2, 2)))
    with pytest.raises(ValueError):
        QuadraticHamiltonian(np.zeros((3, 3)))


@pytest.mark.parametrize("h_z", [0.4, 1.0, 1.7])
def test_open_tfim_dense_form_matches_kron_oracle(h_z):
    n = 4
    np.testing.assert_allclose(tfim_hamiltonian(n, h_z).to_dense(), _kron_tfim(n, h_z, periodic=False), atol=1e-12)


def test_periodic_tfim_matches_kron_oracle_in_even_sector():
    n = 4
    even = _even_mask(n)
    dense = tfim_hamiltonian(n, 0.8, "periodic").to_dense()
    oracle = _kron_tfim(n, 0.8, periodic=True)
    np.testing.assert_allclose(dense[np.ix_(even, even)], oracle[np.ix_(even, even)], atol=1e-12)


@pytest.mark.parametrize(("bc", "h_z"), [("open", 0.7), ("open", 1.3), ("periodic", 1.0), ("periodic", 0.5)])
def test_ground_state_matches_dense_diagonalization(bc, h_z):
    n = 5
    even = _even_mask(n)
    oracle = _kron_tfim(n, h_z, periodic=bc == "periodic")[np.ix_(even, even)]
    vals, vecs = np.linalg.eigh(oracle)
    amps = np.zeros(1 << n, dtype=complex)
    amps[even] = vecs[:, 0]
    result = gaussian_ground_state(tfim_hamiltonian(n, h_z, bc), parity=1)
    assert result.energy == pytest.approx(vals[0], abs=1e-10)
    assert result.parity == 1 and result.unique
    np.testing.assert_allclose(result.covariance, covariance_oracle(amps, n), atol=1e-9)


def test_odd_parity_ground_state_costs_softest_mode():
    h = tfim_hamiltonian(4, 0.6)
    _, eps = canonical_form(h)
    even = gaussian_ground_state(h, parity=1)
    odd = gaussian_ground_state(h, parity=-1)
    assert {even.parity, odd.parity} == {1, -1}
    assert abs(even.energy - odd.energy) == pytest.approx(eps[-1])


def test_degenerate_ground_state_warns():
    h = np.zeros((4, 4))
    h[0, 1], h[1, 0] = 1.0, -1.0
    with pytest.warns(DegenerateGroundState):
        ground_covariance(h, parity=1)


def test_vacuum_is_ground_state_of_pure_field():
    field_only = QuadraticHamiltonian(np.kron(np.eye(3), [[0.0, 2.0], [-2.0, 0.0]]))
    m = ground_covariance(field_only)
    np.testing.assert_allclose(m, covariance_matrix(prepare_named("vacuum", n_qubits=3)), atol=1e-12)


def test_critical_correlator_golden():
    assert ising_critical_correlator(8, 0.5) == pytest.approx(0.6407288619353768, rel=1e-12)
    assert ising_critical_correlator(8, 2) == 0.0


@pytest.mark.parametrize("r", [0.5, 1.5, 2.5, 3.5])
def test_critical_correlator_matches_ground_state(r):
    n = 8
    m = ground_covariance(tfim_hamiltonian(n, 1.0, "periodic"))
    assert abs(m[0, int(2 * r)]) == pytest.approx(ising_critical_correlator(n, r), abs=1e-12)


@pytest.mark.parametrize("r", [0, 0.3, 8])
def test_critical_correlator_rejects_bad_distance(r):
    with pytest.raises(ValueError):
        ising_critical_correlator(8, r)


def test_pe_dual_covariance_golden():
    assert pe_dual_covariance(4, 0.3)[0, 1] == pytest.approx(-0.7223796033994332, abs=1e-12)


@pytest.mark.parametrize("lam", [0.1, 0.3, 0.45])
def test_pe_covariance_is_gaussian(lam):
    h_pe, m = pe_covariance(6, lam)
    assert h_pe == pytest.approx(1 / (4 * lam) - lam)
    assert faf(m, 1) == pytest.approx(0.0, abs=1e-10)
    assert faf(m, 2) == pytest.approx(0.0, abs=1e-10)


def test_pe_dual_covariance_matches_dense_cat_state():
    n, lam = 5, 0.3
    h_pe = 1 / (4 * lam) - lam
    theta = math.acos(-1 / (2 * (h_pe + lam)))
    psi = prepare_named("pe_ground", theta=theta, n_qubits=n)
    np.testing.assert_allclose(covariance_matrix(psi), pe_dual_covariance(n, lam), atol=1e-10)


@pytest.mark.parametrize("lam", [0.0, 0.5, -0.1])
def test_pe_parameter_range(lam):
    with pytest.raises(ValueError):
        pe_covariance(4, lam)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_duality_permutation_is_orthogonal(n):
    d = duality_permutation(n)
    np.testing.assert_array_equal(d @ d.T, np.eye(2 * n))
    # A cyclic shift of 2N modes is an odd permutation; the wrapped sign makes it even.
    assert np.linalg.det(d) == pytest.approx(1.0)
