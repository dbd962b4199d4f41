import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fafkit.algebra import (
    MajoranaIndexSet,
    PauliOperator,
    identity,
    jordan_wigner,
    majorana_string,
    multiply,
    parity_operator,
    pauli_from_label,
)

from conftest import PAULI_X, PAULI_Y, PAULI_Z, kron_all, majorana_matrix, site_operator


@st.composite
def pauli_ops(draw, n=None):
    n = draw(st.integers(1, 4)) if n is None else n
    x = draw(st.integers(0, (1 << n) - 1))
    z = draw(st.integers(0, (1 << n) - 1))
    return PauliOperator(n, x, z, draw(st.integers(0, 3)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_jordan_wigner_matches_kronecker_construction(n):
    for mode in range(1, 2 * n + 1):
        np.testing.assert_allclose(jordan_wigner(mode, n).to_matrix(), majorana_matrix(mode, n), atol=1e-14)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, 2 * n), st.integers(1, 2 * n))))
def test_majorana_anticommutator(args):
    n, a, b = args
    ga, gb = jordan_wigner(a, n).to_matrix(), jordan_wigner(b, n).to_matrix()
    expected = 2 * np.eye(1 << n) if a == b else np.zeros((1 << n, 1 << n))
    np.testing.assert_allclose(ga @ gb + gb @ ga, expected, atol=1e-14)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_ops(n), pauli_ops(n))))
def test_multiply_agrees_with_matrix_product(pair):
    a, b = pair
    np.testing.assert_allclose(multiply(a, b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_ops(n), pauli_ops(n))))
def test_commutes_with_matches_matrices(pair):
    a, b = pair
    ma, mb = a.to_matrix(), b.to_matrix()
    assert a.commutes_with(b) == np.allclose(ma @ mb, mb @ ma)


@given(pauli_ops())
def test_label_round_trip(op):
    assert pauli_from_label(op.label(), op.n_qubits) == op


@given(pauli_ops())
def test_dagger_is_conjugate_transpose(op):
    np.testing.assert_allclose(op.dagger().to_matrix(), op.to_matrix().conj().T, atol=1e-14)


def test_label_rendering_uses_y():
    op = multiply(pauli_from_label("+ X_2", 3), pauli_from_label("+ Z_2", 3))
    assert op.label() == "-i Y_2"
    np.testing.assert_allclose(op.to_matrix(), -1j * site_operator(PAULI_Y, 2, 3))


def test_qubit_one_is_most_significant():
    np.testing.assert_allclose(pauli_from_label("+ X_1", 2).to_matrix(), np.kron(PAULI_X, np.eye(2)))


def test_parity_is_product_of_bilinears():
    n = 3
    prod = identity(n)
    for k in range(1, n + 1):
        prod = multiply(prod, multiply(jordan_wigner(2 * k - 1, n), jordan_wigner(2 * k, n)).scaled(3))
    assert prod == parity_operator(n)
    np.testing.assert_allclose(parity_operator(n).to_matrix(), kron_all([PAULI_Z] * n))


def test_majorana_string_is_ordered_product():
    n = 3
    op = majorana_string([1, 4, 5], n)
    expected = majorana_matrix(1, n) @ majorana_matrix(4, n) @ majorana_matrix(5, n)
    np.testing.assert_allclose(op.to_matrix(), expected, atol=1e-14)
    assert majorana_string(MajoranaIndexSet(6, (1, 4, 5))) == op


def test_bilinear_of_neighbouring_modes_is_z():
    # -i gamma_1 gamma_2 = Z_1 in this convention.
    op = multiply(jordan_wigner(1, 2), jordan_wigner(2, 2)).scaled(3)
    np.testing.assert_allclose(op.to_matrix(), site_operator(PAULI_Z, 1, 2))


@pytest.mark.parametrize(
    "call",
    [
        lambda: jordan_wigner(0, 2),
        lambda: jordan_wigner(5, 2),
        lambda: MajoranaIndexSet(4, (2, 1)),
        lambda: MajoranaIndexSet(3, (1,)),
        lambda: pauli_from_label("+ W_1", 2),
        lambda: pauli_from_label("+ X_3", 2),
        lambda: multiply(identity(2), identity(3)),
        lambda: PauliOperator(0, 0, 0, 0),
        lambda: majorana_string([1, 2]),
    ],
)
def test_invalid_input_raises(call):
    with pytest.raises((ValueError, IndexError)):
        call()
