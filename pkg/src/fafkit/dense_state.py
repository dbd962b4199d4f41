"""Dense state vectors: expectation values, covariance matrices and named states.

Basis index convention: ``|x_1 ... x_N>`` maps to the integer whose most
significant bit is ``x_1``.
"""

from __future__ import annotations

import struct
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import PauliOperator, jordan_wigner

__all__ = [
    "DEFAULT_MAX_QUBITS",
    "CovarianceDiagnostic",
    "StateVector",
    "apply_pauli",
    "apply_unitary",
    "covariance_matrix",
    "dump_state",
    "entanglement_entropy",
    "expectation",
    "haar_state",
    "load_state",
    "majorana_images",
    "prepare_named",
    "product_state",
]

DEFAULT_MAX_QUBITS = 14

_ENDIAN_TAG = {"little": b"LE", "big": b"BE"}


class CovarianceDiagnostic(ArithmeticError):
    """Raised when a two-point Majorana correlator has an unexpected imaginary part."""


@dataclass
class StateVector:
    """Normalized pure state of ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 1 << self.n_qubits:
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        self.amplitudes = amps

    @classmethod
    def from_amplitudes(cls, amplitudes: np.ndarray, normalize: bool = True) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if 1 << n != amps.size:
            raise ValueError("amplitude count must be a power of two")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def kron(self, other: StateVector) -> StateVector:
        return StateVector(self.n_qubits + other.n_qubits, np.kron(self.amplitudes, other.amplitudes))


def _check_cap(n_qubits: int, max_qubits: int) -> None:
    if n_qubits > max_qubits:
        raise MemoryError(f"dense engine capped at N={max_qubits} qubits (requested {n_qubits})")


def _parity_of(values: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(values) & 1).astype(np.int8)


def apply_pauli(amplitudes: np.ndarray, op: PauliOperator) -> np.ndarray:
    """Return ``op @ amplitudes`` for a vector (or matrix of column vectors)."""
    dim = amplitudes.shape[0]
    if dim != 1 << op.n_qubits:
        raise ValueError(f"dimension mismatch: vector of size {dim} vs {op.n_qubits}-qubit operator")
    basis = np.arange(dim, dtype=np.int64)
    signs = 1 - 2 * _parity_of(basis & op.z_mask)
    coeff = (1j**op.phase_power) * signs
    out = np.empty_like(amplitudes, dtype=complex)
    if amplitudes.ndim == 1:
        out[basis ^ op.x_mask] = coeff * amplitudes
    else:
        out[basis ^ op.x_mask] = coeff[:, None] * amplitudes
    return out


def expectation(psi: StateVector, op: PauliOperator) -> complex:
    """``<psi|op|psi>``."""
    if psi.n_qubits != op.n_qubits:
        raise ValueError(f"dimension mismatch: {psi.n_qubits}-qubit state vs {op.n_qubits}-qubit operator")
    value = complex(np.vdot(psi.amplitudes, apply_pauli(psi.amplitudes, op)))
    if op.is_hermitian and abs(value.imag) > 1e-12:
        raise CovarianceDiagnostic(f"Hermitian expectation has imaginary part {value.imag:.3e}")
    return value


def majorana_images(amplitudes: np.ndarray, n_qubits: int) -> np.ndarray:
    """Stack of ``gamma_m |psi>`` for ``m = 1..2N`` with shape ``(2N, 2**N)``."""
    return np.stack([apply_pauli(amplitudes, jordan_wigner(m, n_qubits)) for m in range(1, 2 * n_qubits + 1)])


def covariance_matrix(psi: StateVector, atol: float = 1e-10) -> np.ndarray:
    """Covariance matrix ``M_mn = Re <-i gamma_m gamma_n>`` (zero diagonal).

    Raises:
        CovarianceDiagnostic: if the imaginary residue of any correlator exceeds ``atol``.
    """
    images = majorana_images(psi.amplitudes, psi.n_qubits)
    # gamma_m is Hermitian, so <gamma_m gamma_n> = <gamma_m psi | gamma_n psi>.
    gram = images.conj() @ images.T
    off = ~np.eye(gram.shape[0], dtype=bool)
    residue = np.max(np.abs(gram.real[off]), initial=0.0)
    if residue > atol:
        raise CovarianceDiagnostic(f"Majorana bilinear has real part {residue:.3e} (expected purely imaginary)")
    m = gram.imag.copy()
    np.fill_diagonal(m, 0.0)
    return 0.5 * (m - m.T)


def apply_unitary(psi: StateVector, u: np.ndarray, qubits: tuple[int, ...] | list[int]) -> StateVector:
    """Apply a dense unitary ``u`` acting on the listed 1-based qubits (in that order)."""
    qubits = tuple(int(q) for q in qubits)
    k = len(qubits)
    u = np.asarray(u, dtype=complex)
    if u.shape != (1 << k, 1 << k):
        raise ValueError(f"gate shape {u.shape} does not match {k} qubits")
    if len(set(qubits)) != k or not all(1 <= q <= psi.n_qubits for q in qubits):
        raise IndexError(f"invalid qubit list {qubits} for N={psi.n_qubits}")
    if not np.allclose(u.conj().T @ u, np.eye(1 << k), atol=1e-10):
        raise ValueError("gate is not unitary within 1e-10")
    n = psi.n_qubits
    tensor = psi.amplitudes.reshape((2,) * n)
    axes = [q - 1 for q in qubits]
    moved = np.moveaxis(tensor, axes, list(range(k))).reshape(1 << k, -1)
    moved = (u @ moved).reshape((2,) * n)
    out = np.moveaxis(moved, list(range(k)), axes).reshape(-1)
    return StateVector(n, out / np.linalg.norm(out))


def haar_state(n_qubits: int, sector: str = "generic", seed: int | np.random.Generator | None = None) -> StateVector:
    """Haar-random pure state; ``sector="even_parity"`` restricts to the even-parity subspace."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    _check_cap(n_qubits, DEFAULT_MAX_QUBITS + 6)
    rng = np.random.default_rng(seed)
    dim = 1 << n_qubits
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    if sector in ("even", "even_parity"):
        amps[_parity_of(np.arange(dim)) == 1] = 0.0
    elif sector != "generic":
        raise ValueError(f"unknown sector {sector!r}")
    return StateVector(n_qubits, amps / np.linalg.norm(amps))


def entanglement_entropy(psi: StateVector, cut: int) -> float:
    """Von Neumann entropy (bits) of qubits ``1..cut``."""
    if not 1 <= cut < psi.n_qubits:
        raise ValueError(f"cut must satisfy 1 <= cut < N, got {cut}")
    mat = psi.amplitudes.reshape(1 << cut, -1)
    s = np.linalg.svd(mat, compute_uv=False) ** 2
    s = s[s > 1e-300]
    return float(max(0.0, -np.sum(s * np.log2(s))))


def product_state(single: np.ndarray, n_qubits: int) -> StateVector:
    """``single`` tensored ``n_qubits`` times."""
    amps = np.ones(1, dtype=complex)
    for _ in range(n_qubits):
        amps = np.kron(amps, single)
    return StateVector.from_amplitudes(amps)


def _psi_theta(theta: float) -> np.ndarray:
    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = amps[0b0011] = amps[0b1100] = 0.5
    amps[0b1111] = 0.5 * np.exp(1j * theta)
    return amps


def prepare_named(name: str, *, theta: float = 0.0, phi: float = 0.0, n_qubits: int | None = None) -> StateVector:
    """Build one of the named benchmark states.

    Names:
        ``vacuum``: ``|0...0>`` on ``n_qubits`` qubits (default 4).
        ``psi_theta``: four-qubit state ``(|0000>+|0011>+|1100>+e^{i theta}|1111>)/2``.
        ``psi_theta_product``: ``n_qubits/4`` copies of ``psi_theta``.
        ``t_product``: ``(cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>)`` on every qubit.
        ``pe_ground``: cat state ``sqrt(a_N/2)(|theta>^N + |-theta>^N)`` with
            ``|theta> = cos(theta/2)|0> - sin(theta/2)|1>``.
    """
    if name == "vacuum":
        n = 4 if n_qubits is None else n_qubits
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = 1.0
        return StateVector(n, amps)
    if name == "psi_theta":
        return StateVector(4, _psi_theta(theta))
    if name == "psi_theta_product":
        if n_qubits is None or n_qubits < 4 or n_qubits % 4:
            raise ValueError(f"psi_theta_product needs N divisible by 4, got {n_qubits}")
        amps = np.ones(1, dtype=complex)
        for _ in range(n_qubits // 4):
            amps = np.kron(amps, _psi_theta(theta))
        return StateVector.from_amplitudes(amps)
    if name == "t_product":
        if n_qubits is None or n_qubits < 1:
            raise ValueError("t_product needs a positive n_qubits")
        single = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        return product_state(single, n_qubits)
    if name == "pe_ground":
        if n_qubits is None or n_qubits < 2:
            raise ValueError("pe_ground needs n_qubits >= 2")
        plus = product_state(np.array([np.cos(theta / 2), -np.sin(theta / 2)]), n_qubits).amplitudes
        minus = product_state(np.array([np.cos(theta / 2), np.sin(theta / 2)]), n_qubits).amplitudes
        a_n = 1.0 / (1.0 + np.cos(theta) ** n_qubits)
        return StateVector.from_amplitudes(np.sqrt(a_n / 2) * (plus + minus))
    raise ValueError(f"unknown named state {name!r}")


def dump_state(psi: StateVector, path: str | Path) -> None:
    """Write ``psi`` as an 8-byte header (uint32 N, 2-byte endianness tag, 2 pad bytes) plus complex128 data."""
    path = Path(path)
    header = struct.pack("=I2s2x", psi.n_qubits, _ENDIAN_TAG[sys.byteorder])
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(psi.amplitudes.astype(np.complex128).tobytes())
    tmp.replace(path)


def load_state(path: str | Path) -> StateVector:
    """Inverse of :func:`dump_state`; byte-swaps data written on a foreign-endian machine."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ValueError("file too short for state header")
    tag = raw[4:6]
    if tag == b"LE":
        order = "<"
    elif tag == b"BE":
        order = ">"
    else:
        raise ValueError(f"unknown endianness tag {tag!r}")
    (n,) = struct.unpack(order + "I", raw[:4])
    data = np.frombuffer(raw[8:], dtype=np.dtype(order + "c16"))
    if data.size != 1 << n:
        raise ValueError(f"header says N={n} but file holds {data.size} amplitudes")
    return StateVector(n, data.astype(complex))
