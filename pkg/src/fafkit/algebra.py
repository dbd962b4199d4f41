"""Pauli and Majorana string algebra with exact phase bookkeeping.

A Pauli string on ``N`` qubits is stored as two integer bit masks plus a power
of ``i``::

    P = i**phase_power * prod_j X_j**x_j Z_j**z_j     (site order, X left of Z)

Qubit 1 is the most significant bit of each mask, which matches the basis
index convention of :mod:`fafkit.dense_state`.  Majorana operators follow the
Jordan-Wigner convention in which the string of ``Z`` operators extends over
lower-indexed sites::

    gamma_{2k-1} = Z_1 ... Z_{k-1} X_k
    gamma_{2k}   = Z_1 ... Z_{k-1} Y_k

Majorana modes are numbered from 1 in the public API.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PauliOperator",
    "MajoranaIndexSet",
    "identity",
    "jordan_wigner",
    "majorana_string",
    "multiply",
    "parity_operator",
    "pauli_from_label",
]

_PHASE_SYMBOL = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I = np.eye(2, dtype=complex)


def _popcount(value: int) -> int:
    return bin(value).count("1")


@dataclass(frozen=True)
class PauliOperator:
    """Signed Pauli string ``i**phase_power * prod X**x Z**z``.

    Attributes:
        n_qubits: Number of qubits ``N``.
        x_mask: ``N``-bit mask of ``X`` factors, qubit 1 is the most significant bit.
        z_mask: ``N``-bit mask of ``Z`` factors, same bit order.
        phase_power: Power of ``i`` in ``{0, 1, 2, 3}``.
    """

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase_power: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError(f"masks must fit in {self.n_qubits} bits")
        object.__setattr__(self, "phase_power", self.phase_power % 4)

    def bit(self, qubit: int) -> int:
        """Mask bit belonging to 1-based ``qubit``."""
        return 1 << (self.n_qubits - qubit)

    @property
    def x_bits(self) -> str:
        return format(self.x_mask, f"0{self.n_qubits}b")

    @property
    def z_bits(self) -> str:
        return format(self.z_mask, f"0{self.n_qubits}b")

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def is_hermitian(self) -> bool:
        # (X^x Z^z)^dagger = (-1)^{|x & z|} X^x Z^z, so the prefactor must absorb that sign.
        return (self.phase_power - _popcount(self.x_mask & self.z_mask)) % 2 == 0

    @property
    def is_identity_string(self) -> bool:
        """True when the string is a multiple of the identity."""
        return self.x_mask == 0 and self.z_mask == 0

    def commutes_with(self, other: PauliOperator) -> bool:
        _check_size(self, other)
        sym = _popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)
        return sym % 2 == 0

    def scaled(self, power: int) -> PauliOperator:
        """Return ``i**power`` times this operator."""
        return PauliOperator(self.n_qubits, self.x_mask, self.z_mask, self.phase_power + power)

    def dagger(self) -> PauliOperator:
        overlap = _popcount(self.x_mask & self.z_mask)
        return PauliOperator(self.n_qubits, self.x_mask, self.z_mask, -self.phase_power + 2 * overlap)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)

    def __neg__(self) -> PauliOperator:
        return self.scaled(2)

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**N`` square matrix (for tests and small-N oracles)."""
        factors = []
        for q in range(1, self.n_qubits + 1):
            b = self.bit(q)
            f = _I
            if self.x_mask & b:
                f = _X
            if self.z_mask & b:
                f = f @ _Z
            factors.append(f)
        return (1j**self.phase_power) * reduce(np.kron, factors)

    def label(self) -> str:
        """Render as ``"<sign> P_1 P_2 ..."`` with ``Y`` for combined ``X`` and ``Z``."""
        # X Z = -i Y, so every Y factor removes one power of i from the prefactor.
        phase = (self.phase_power - _popcount(self.x_mask & self.z_mask)) % 4
        factors = []
        for q in range(1, self.n_qubits + 1):
            b = self.bit(q)
            has_x, has_z = bool(self.x_mask & b), bool(self.z_mask & b)
            if has_x and has_z:
                factors.append(f"Y_{q}")
            elif has_x:
                factors.append(f"X_{q}")
            elif has_z:
                factors.append(f"Z_{q}")
        body = " ".join(factors) if factors else "I"
        return f"{_PHASE_SYMBOL[phase]} {body}"

    def __str__(self) -> str:
        return self.label()


_LABEL_TOKEN = re.compile(r"([XYZ])_(\d+)")


def pauli_from_label(text: str, n_qubits: int) -> PauliOperator:
    """Parse the output of :meth:`PauliOperator.label`.

    Example:
        >>> pauli_from_label("-i X_1 Z_3", 3).label()
        '-i X_1 Z_3'
    """
    text = text.strip()
    sign, _, body = text.partition(" ")
    inverse = {v: k for k, v in _PHASE_SYMBOL.items()}
    if sign not in inverse:
        raise ValueError(f"unrecognised sign prefix {sign!r}")
    phase = inverse[sign]
    op = PauliOperator(n_qubits).scaled(phase)
    if body.strip() in ("", "I"):
        return op
    for token in body.split():
        match = _LABEL_TOKEN.fullmatch(token)
        if match is None:
            raise ValueError(f"cannot parse Pauli factor {token!r}")
        kind, qubit = match.group(1), int(match.group(2))
        if not 1 <= qubit <= n_qubits:
            raise ValueError(f"qubit {qubit} out of range for N={n_qubits}")
        b = 1 << (n_qubits - qubit)
        x = b if kind in "XY" else 0
        z = b if kind in "YZ" else 0
        # Y = i X Z
        factor = PauliOperator(n_qubits, x, z, 1 if kind == "Y" else 0)
        op = multiply(op, factor)
    return op


def identity(n_qubits: int) -> PauliOperator:
    return PauliOperator(n_qubits)


def _check_size(a: PauliOperator, b: PauliOperator) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Product ``a @ b`` of two Pauli strings with exact phase.

    Moving ``Z^{z_a}`` through ``X^{x_b}`` costs ``(-1)^{|z_a & x_b|}``.
    """
    _check_size(a, b)
    phase = a.phase_power + b.phase_power + 2 * _popcount(a.z_mask & b.x_mask)
    return PauliOperator(a.n_qubits, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, phase)


@dataclass(frozen=True)
class MajoranaIndexSet:
    """Strictly increasing set of 1-based Majorana indices on ``n_modes = 2N`` modes."""

    n_modes: int
    indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if self.n_modes < 2 or self.n_modes % 2:
            raise ValueError(f"n_modes must be a positive even number, got {self.n_modes}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing: {idx}")
        if idx and not (1 <= idx[0] and idx[-1] <= self.n_modes):
            raise ValueError(f"indices must lie in [1, {self.n_modes}]: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def n_qubits(self) -> int:
        return self.n_modes // 2

    def __len__(self) -> int:
        return len(self.indices)


def jordan_wigner(mode: int, n_qubits: int) -> PauliOperator:
    """Pauli form of the Majorana operator ``gamma_mode`` (1-based)."""
    if not 1 <= mode <= 2 * n_qubits:
        raise IndexError(f"Majorana mode {mode} out of range [1, {2 * n_qubits}]")
    k = (mode + 1) // 2
    site = 1 << (n_qubits - k)
    # Z on qubits 1..k-1 occupies the mask bits strictly above ``site``.
    string = ((1 << n_qubits) - 1) ^ ((site << 1) - 1)
    if mode % 2:
        return PauliOperator(n_qubits, site, string, 0)
    # Y_k = i X_k Z_k; the Z string commutes past X_k because it lives on other sites.
    return PauliOperator(n_qubits, site, string | site, 1)


def majorana_string(indices: MajoranaIndexSet | Sequence[int] | Iterable[int], n_qubits: int | None = None) -> PauliOperator:
    """Ordered product ``gamma_{m_1} ... gamma_{m_s}`` as a signed Pauli string.

    Args:
        indices: A :class:`MajoranaIndexSet` or an increasing sequence of 1-based modes.
        n_qubits: Number of qubits; required unless ``indices`` is a MajoranaIndexSet.
    """
    if isinstance(indices, MajoranaIndexSet):
        n = indices.n_qubits if n_qubits is None else n_qubits
        seq = indices.indices
    else:
        if n_qubits is None:
            raise ValueError("n_qubits is required for a plain index sequence")
        n = n_qubits
        seq = tuple(MajoranaIndexSet(2 * n, tuple(indices)).indices)
    op = identity(n)
    for m in seq:
        op = multiply(op, jordan_wigner(m, n))
    return op


def parity_operator(n_qubits: int) -> PauliOperator:
    """Fermionic parity ``prod_k Z_k``."""
    return PauliOperator(n_qubits, 0, (1 << n_qubits) - 1, 0)
