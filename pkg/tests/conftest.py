"""Shared fixtures and independent dense oracles built directly from Kronecker products."""

from __future__ import annotations

from functools import reduce

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fafkit", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fafkit")

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
EYE2 = np.eye(2, dtype=complex)


def kron_all(factors):
    return reduce(np.kron, factors)


def site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """``op`` on 1-based ``site`` of ``n`` qubits, qubit 1 leftmost in the Kronecker product."""
    return kron_all([op if q == site else EYE2 for q in range(1, n + 1)])


def majorana_matrix(mode: int, n: int) -> np.ndarray:
    """Jordan-Wigner Majorana built from scratch: Z strings on sites left of ``k``."""
    k = (mode + 1) // 2
    local = PAULI_X if mode % 2 else PAULI_Y
    return kron_all([PAULI_Z] * (k - 1) + [local] + [EYE2] * (n - k))


def covariance_oracle(amps: np.ndarray, n: int) -> np.ndarray:
    gammas = [majorana_matrix(m, n) for m in range(1, 2 * n + 1)]
    m = np.zeros((2 * n, 2 * n))
    for a in range(2 * n):
        for b in range(2 * n):
            if a != b:
                m[a, b] = np.real(np.vdot(amps, -1j * gammas[a] @ gammas[b] @ amps))
    return m


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
