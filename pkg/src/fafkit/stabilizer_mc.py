"""Stabilizer Monte Carlo for the circuit-averaged antiflatness ``F_1``.

Uniformly random two-qubit Clifford gates form a unitary 2-design, so the ensemble
average of ``F_1`` (a two-replica quantity) over Clifford circuits equals the Haar
average over the same circuit architecture.  Two engines live here:

* :class:`StabilizerTableau`, a full Aaronson-Gottesman tableau with signs, used for
  exact Pauli expectation values and covariance matrices;
* a sign-free, bit-packed stabilizer kernel (compiled with numba) that evaluates
  ``F_1 = N - #{pairs m<n with |M_mn| = 1}`` for large ``N``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numba
import numpy as np

from .algebra import PauliOperator, jordan_wigner, multiply
from .nongauss import typical_faf

__all__ = [
    "CircuitBuilder",
    "CliffordGate",
    "DecayFit",
    "StabilizerDiagnostic",
    "StabilizerTableau",
    "apply_clifford",
    "clifford_group",
    "covariance_from_tableau",
    "delta_faf1",
    "faf1_curve_samples",
    "faf1_of_circuit",
    "faf1_samples",
    "fit_decay",
    "fit_log_scaling",
    "mc_faf1",
    "mc_faf1_curve",
    "pauli_expectation",
    "rmps_faf1",
    "sample_clifford2",
    "t_sat",
    "z2_clifford_group",
]


class StabilizerDiagnostic(ArithmeticError):
    """A stabilizer covariance matrix violated the one-partner-per-mode structure."""


# ---------------------------------------------------------------------------
# Two-qubit Clifford group
# ---------------------------------------------------------------------------

# Local bit order for a two-qubit Pauli: (x1, z1, x2, z2).
_OMEGA = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.int64)


@dataclass(frozen=True)
class CliffordGate:
    """Two-qubit Clifford ``g`` stored through its action on Paulis.

    ``symplectic[:, c]`` is the image of generator ``c`` of ``(X1, Z1, X2, Z2)`` as bits
    ``(x1, z1, x2, z2)``; ``signs[c]`` is 1 when that image carries a minus sign.
    """

    symplectic: tuple[tuple[int, ...], ...]
    signs: tuple[int, int, int, int]

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.symplectic, dtype=np.uint8)

    def image(self, x1: int, z1: int, x2: int, z2: int) -> PauliOperator:
        """``g P g^dagger`` for the Hermitian-up-to-phase string ``X^x Z^z`` on two qubits."""
        return _conjugation_table(self)[(x1 << 3) | (z1 << 2) | (x2 << 1) | z2]

    def to_unitary(self) -> np.ndarray:
        """A 4x4 unitary realizing the gate (fixed up to a global phase)."""
        stab = [self.image(0, 1, 0, 0).to_matrix(), self.image(0, 0, 0, 1).to_matrix()]
        proj = (np.eye(4) + stab[0]) @ (np.eye(4) + stab[1]) / 4
        vals, vecs = np.linalg.eigh(proj)
        ground = vecs[:, int(np.argmax(vals))]
        cols = []
        for b in range(4):
            cols.append(self.image((b >> 1) & 1, 0, b & 1, 0).to_matrix() @ ground)
        return np.stack(cols, axis=1)

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> CliffordGate:
        """Read the symplectic action and signs off a dense two-qubit Clifford unitary."""
        u = np.asarray(u, dtype=complex)
        cols, signs = [], []
        for c, (x, z) in enumerate(((0b10, 0), (0, 0b10), (0b01, 0), (0, 0b01))):
            conj = u @ PauliOperator(2, x, z, 0).to_matrix() @ u.conj().T
            for xi in range(4):
                for zi in range(4):
                    p = PauliOperator(2, xi, zi, bin(xi & zi).count("1") % 4).to_matrix()
                    overlap = np.trace(p.conj().T @ conj) / 4
                    if abs(abs(overlap) - 1) < 1e-9:
                        if abs(overlap.imag) > 1e-9:
                            raise ValueError("conjugated Pauli is not Hermitian")
                        cols.append(((xi >> 1) & 1, (zi >> 1) & 1, xi & 1, zi & 1))
                        signs.append(0 if overlap.real > 0 else 1)
            if len(cols) != c + 1:
                raise ValueError("matrix is not a Clifford unitary")
        sym = tuple(tuple(int(cols[c][i]) for c in range(4)) for i in range(4))
        return cls(sym, tuple(signs))

    def conjugate(self, op: PauliOperator) -> PauliOperator:
        """Conjugate a two-qubit Pauli operator (any phase)."""
        if op.n_qubits != 2:
            raise ValueError("CliffordGate.conjugate expects a two-qubit operator")
        x1, x2 = (op.x_mask >> 1) & 1, op.x_mask & 1
        z1, z2 = (op.z_mask >> 1) & 1, op.z_mask & 1
        img = self.image(x1, z1, x2, z2)
        return PauliOperator(2, img.x_mask, img.z_mask, (img.phase_power + op.phase_power) % 4)


def _bits_to_pauli(bits: Sequence[int], sign: int) -> PauliOperator:
    x = (int(bits[0]) << 1) | int(bits[2])
    z = (int(bits[1]) << 1) | int(bits[3])
    # Hermitian representative i^{|x&z|} X^x Z^z, optionally negated.
    return PauliOperator(2, x, z, (bin(x & z).count("1") + 2 * sign) % 4)


@lru_cache(maxsize=None)
def _conjugation_table(gate: CliffordGate) -> tuple[PauliOperator, ...]:
    s = gate.matrix
    images = [_bits_to_pauli(s[:, c], gate.signs[c]) for c in range(4)]
    table = []
    for idx in range(16):
        x1, z1, x2, z2 = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        # X^x Z^z = X1^x1 X2^x2 Z1^z1 Z2^z2 (all phase-free factors).
        out = PauliOperator(2, 0, 0, 0)
        for c, bit in ((0, x1), (2, x2), (1, z1), (3, z2)):
            if bit:
                out = multiply(out, images[c])
        table.append(out)
    return tuple(table)


@lru_cache(maxsize=1)
def _symplectic_group() -> tuple[np.ndarray, ...]:
    codes = np.arange(1 << 16, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(15, -1, -1)) & 1
    mats = bits.reshape(-1, 4, 4)
    forms = np.einsum("kji,jl,klm->kim", mats, _OMEGA, mats) % 2
    keep = np.all(forms == _OMEGA, axis=(1, 2))
    return tuple(m.astype(np.uint8) for m in mats[keep])


@lru_cache(maxsize=1)
def clifford_group() -> tuple[CliffordGate, ...]:
    """All 11520 two-qubit Cliffords modulo global phase, in a fixed canonical order."""
    gates = []
    for m in _symplectic_group():
        sym = tuple(tuple(int(v) for v in row) for row in m)
        for signs in itertools.product((0, 1), repeat=4):
            gates.append(CliffordGate(sym, signs))
    return tuple(gates)


@lru_cache(maxsize=1)
def z2_clifford_group() -> tuple[CliffordGate, ...]:
    """Sub-list of gates with ``g (Z x Z) g^dagger = Z x Z``."""
    zz = PauliOperator(2, 0, 0b11, 0)
    out = []
    for g in clifford_group():
        s = g.matrix
        if s[0, 1] ^ s[0, 3] or s[2, 1] ^ s[2, 3] or not (s[1, 1] ^ s[1, 3]) or not (s[3, 1] ^ s[3, 3]):
            continue  # bit pattern of the Z1 Z2 image is not (0, 1, 0, 1)
        image = multiply(_bits_to_pauli(s[:, 1], g.signs[1]), _bits_to_pauli(s[:, 3], g.signs[3]))
        if image == zz:
            out.append(g)
    return tuple(out)


@lru_cache(maxsize=2)
def _group_arrays(symmetric: bool) -> np.ndarray:
    gates = z2_clifford_group() if symmetric else clifford_group()
    return np.stack([g.matrix for g in gates])


def sample_clifford2(symmetric: bool = False, seed: int | np.random.Generator | None = None) -> CliffordGate:
    """Uniformly random two-qubit Clifford (from the ``Z x Z``-commuting subgroup if ``symmetric``)."""
    rng = np.random.default_rng(seed)
    gates = z2_clifford_group() if symmetric else clifford_group()
    return gates[int(rng.integers(len(gates)))]


# ---------------------------------------------------------------------------
# Full tableau with signs
# ---------------------------------------------------------------------------


@dataclass
class StabilizerTableau:
    """Destabilizer rows ``0..N-1`` and stabilizer rows ``N..2N-1`` as bit matrices plus sign bits."""

    n_qubits: int
    x: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)

    @classmethod
    def vacuum(cls, n_qubits: int) -> StabilizerTableau:
        """Tableau of ``|0...0>``: destabilizers ``X_k``, stabilizers ``Z_k``."""
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        eye = np.eye(n_qubits, dtype=bool)
        zero = np.zeros((n_qubits, n_qubits), dtype=bool)
        return cls(n_qubits, np.vstack([eye, zero]), np.vstack([zero, eye]), np.zeros(2 * n_qubits, dtype=bool))

    def copy(self) -> StabilizerTableau:
        return StabilizerTableau(self.n_qubits, self.x.copy(), self.z.copy(), self.r.copy())

    def row(self, i: int) -> PauliOperator:
        """Row ``i`` as a Hermitian :class:`PauliOperator`."""
        n = self.n_qubits
        x = int("".join("1" if b else "0" for b in self.x[i]), 2)
        z = int("".join("1" if b else "0" for b in self.z[i]), 2)
        return PauliOperator(n, x, z, (bin(x & z).count("1") + 2 * int(self.r[i])) % 4)

    def stabilizers(self) -> list[PauliOperator]:
        return [self.row(i) for i in range(self.n_qubits, 2 * self.n_qubits)]

    def check(self) -> None:
        """Verify the symplectic commutation pattern of a valid tableau."""
        n = self.n_qubits
        form = (self.x.astype(np.int64) @ self.z.T.astype(np.int64) + self.z.astype(np.int64) @ self.x.T.astype(np.int64)) % 2
        expected = np.zeros((2 * n, 2 * n), dtype=np.int64)
        expected[:n, n:] = np.eye(n, dtype=np.int64)
        expected[n:, :n] = np.eye(n, dtype=np.int64)
        if not np.array_equal(form, expected):
            raise StabilizerDiagnostic("tableau rows do not form a symplectic basis")


def apply_clifford(tab: StabilizerTableau, gate: CliffordGate, qubits: tuple[int, int]) -> StabilizerTableau:
    """Return ``g tab g^dagger`` for ``gate`` acting on the 1-based ``qubits = (i, j)``."""
    i, j = (int(q) for q in qubits)
    n = tab.n_qubits
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"invalid qubit pair {(i, j)} for N={n}")
    out = tab.copy()
    a, b = i - 1, j - 1
    x1, z1, x2, z2 = (v.astype(np.int64) for v in (tab.x[:, a], tab.z[:, a], tab.x[:, b], tab.z[:, b]))
    idx = (x1 << 3) | (z1 << 2) | (x2 << 1) | z2
    table = _conjugation_table(gate)
    new_x = np.array([[(p.x_mask >> 1) & 1, p.x_mask & 1] for p in table], dtype=bool)
    new_z = np.array([[(p.z_mask >> 1) & 1, p.z_mask & 1] for p in table], dtype=bool)
    phase = np.array([p.phase_power for p in table], dtype=np.int64)
    # Row phase as i^p X^x Z^z: p = |x&z| + 2 r.  Only the local factor changes, and
    # it picks up the tabulated phase relative to the phase-free local string.
    local_y = (x1 & z1) + (x2 & z2)
    out_y = (new_x[idx, 0] & new_z[idx, 0]).astype(np.int64) + (new_x[idx, 1] & new_z[idx, 1]).astype(np.int64)
    p = (local_y + 2 * tab.r.astype(np.int64) + phase[idx]) % 4
    diff = (p - out_y) % 4
    if np.any(diff % 2):
        raise StabilizerDiagnostic("Clifford conjugation produced a non-Hermitian row")
    out.r = diff == 2
    out.x[:, a], out.x[:, b] = new_x[idx, 0], new_x[idx, 1]
    out.z[:, a], out.z[:, b] = new_z[idx, 0], new_z[idx, 1]
    return out


def _row_masks(tab: StabilizerTableau) -> tuple[list[int], list[int]]:
    weights = 1 << np.arange(tab.n_qubits - 1, -1, -1, dtype=object)
    xs = [int(np.dot(row.astype(object), weights)) for row in tab.x]
    zs = [int(np.dot(row.astype(object), weights)) for row in tab.z]
    return xs, zs


def _anticommutes(x1: int, z1: int, x2: int, z2: int) -> bool:
    return ((x1 & z2).bit_count() + (z1 & x2).bit_count()) % 2 == 1


def pauli_expectation(tab: StabilizerTableau, op: PauliOperator) -> int:
    """``<psi|op|psi>`` in ``{-1, 0, +1}`` for a Hermitian Pauli ``op``."""
    if op.n_qubits != tab.n_qubits:
        raise ValueError("operator and tableau sizes differ")
    if not op.is_hermitian:
        raise ValueError(f"{op} is not Hermitian")
    n = tab.n_qubits
    xs, zs = _row_masks(tab)
    for k in range(n, 2 * n):
        if _anticommutes(xs[k], zs[k], op.x_mask, op.z_mask):
            return 0
    # op = +- product of the stabilizers whose paired destabilizer anticommutes with op.
    acc = PauliOperator(n, 0, 0, 0)
    for k in range(n):
        if _anticommutes(xs[k], zs[k], op.x_mask, op.z_mask):
            acc = multiply(acc, tab.row(n + k))
    if acc.x_mask != op.x_mask or acc.z_mask != op.z_mask:
        raise StabilizerDiagnostic("operator commutes with the stabilizer group but is not in it")
    rel = (op.phase_power - acc.phase_power) % 4
    return 1 if rel == 0 else -1


def _anticommutation_columns(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Bit matrix ``C[g, m-1]``: whether stabilizer ``g`` anticommutes with ``gamma_m``."""
    x = x.astype(bool)
    z = z.astype(bool)
    prefix = np.zeros_like(x)
    if x.shape[1] > 1:
        prefix[:, 1:] = np.logical_xor.accumulate(x, axis=1)[:, :-1]
    c = np.empty((x.shape[0], 2 * x.shape[1]), dtype=bool)
    c[:, 0::2] = z ^ prefix
    c[:, 1::2] = z ^ x ^ prefix
    return c


def _partner_pairs(c: np.ndarray) -> list[tuple[int, int]]:
    """Pairs ``(m, n)`` (0-based, ``m < n``) of identical columns of ``C``."""
    packed = np.packbits(c, axis=0).T
    _, inverse, counts = np.unique(packed, axis=0, return_inverse=True, return_counts=True)
    if counts.size and counts.max() > 2:
        raise StabilizerDiagnostic(f"a Majorana mode has {counts.max() - 1} correlated partners")
    pairs = []
    inverse = inverse.reshape(-1)
    for label in np.flatnonzero(counts == 2):
        m, n = np.flatnonzero(inverse == label)
        pairs.append((int(m), int(n)))
    return pairs


def covariance_from_tableau(tab: StabilizerTableau) -> np.ndarray:
    """Covariance matrix with entries in ``{-1, 0, 1}``."""
    n = tab.n_qubits
    m = np.zeros((2 * n, 2 * n))
    c = _anticommutation_columns(tab.x[n:], tab.z[n:])
    for a, b in _partner_pairs(c):
        # -i gamma_a gamma_b is Hermitian.
        op = multiply(jordan_wigner(a + 1, n), jordan_wigner(b + 1, n)).scaled(3)
        value = pauli_expectation(tab, op)
        m[a, b], m[b, a] = value, -value
    return m


# ---------------------------------------------------------------------------
# Circuits and the fast sign-free kernel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitBuilder:
    """Random Clifford circuit architecture.

    ``kind="brickwall"`` uses ``depth`` alternating layers (odd layers on pairs
    ``(1,2), (3,4), ...``; even layers on ``(2,3), (4,5), ...``; open boundaries).
    ``kind="staircase"`` applies blocks on qubits ``j..j+r`` for ``j = 1..N-r``, each block
    a brickwall of ``layers`` layers (at least ``2r``).
    """

    n_qubits: int
    kind: str = "brickwall"
    depth: int = 1
    r: int = 1
    layers: int | None = None
    symmetry: str = "generic"

    def __post_init__(self) -> None:
        if self.kind not in ("brickwall", "staircase"):
            raise ValueError(f"unknown circuit kind {self.kind!r}")
        if self.symmetry not in ("generic", "z2"):
            raise ValueError(f"unknown symmetry {self.symmetry!r}")
        if self.n_qubits < 2:
            raise ValueError("circuits need at least two qubits")
        if self.kind == "brickwall" and self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.kind == "staircase":
            if self.r < 0 or self.n_qubits <= self.r:
                raise ValueError(f"staircase needs 0 <= r < N, got r={self.r}, N={self.n_qubits}")
            if self.r > 0 and self.block_layers < 2 * self.r:
                raise ValueError(f"staircase blocks need at least 2r = {2 * self.r} layers")

    @property
    def block_layers(self) -> int:
        return 2 * self.r if self.layers is None else int(self.layers)

    def pairs(self) -> np.ndarray:
        """Ordered list of 1-based qubit pairs, one row per gate."""
        out: list[tuple[int, int]] = []
        if self.kind == "brickwall":
            out = _brickwall_pairs(1, self.n_qubits, self.depth)
        else:
            if self.r == 0:
                return np.zeros((0, 2), dtype=np.int64)
            for j in range(1, self.n_qubits - self.r + 1):
                out.extend(_brickwall_pairs(j, j + self.r, self.block_layers))
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """``(pairs, gate indices)`` for one circuit realization."""
        pairs = self.pairs()
        size = len(z2_clifford_group() if self.symmetry == "z2" else clifford_group())
        return pairs, rng.integers(size, size=len(pairs))


def _brickwall_pairs(first: int, last: int, depth: int) -> list[tuple[int, int]]:
    out = []
    for t in range(1, depth + 1):
        start = first if t % 2 == 1 else first + 1
        out.extend((q, q + 1) for q in range(start, last, 2))
    return out


@numba.njit(cache=True)
def _run_kernel(xcols, zcols, pairs, mats):  # pragma: no cover - compiled
    n_words = xcols.shape[1]
    for g in range(pairs.shape[0]):
        a = pairs[g, 0] - 1
        b = pairs[g, 1] - 1
        m = mats[g]
        for w in range(n_words):
            src0 = xcols[a, w]
            src1 = zcols[a, w]
            src2 = xcols[b, w]
            src3 = zcols[b, w]
            out = np.zeros(4, dtype=np.uint64)
            for i in range(4):
                acc = np.uint64(0)
                if m[i, 0]:
                    acc ^= src0
                if m[i, 1]:
                    acc ^= src1
                if m[i, 2]:
                    acc ^= src2
                if m[i, 3]:
                    acc ^= src3
                out[i] = acc
            xcols[a, w] = out[0]
            zcols[a, w] = out[1]
            xcols[b, w] = out[2]
            zcols[b, w] = out[3]


def _vacuum_columns(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Column-major, row-packed stabilizer bits: word ``w`` of qubit ``k`` holds rows ``64w..64w+63``."""
    n_words = (n_qubits + 63) // 64
    xcols = np.zeros((n_qubits, n_words), dtype=np.uint64)
    zcols = np.zeros((n_qubits, n_words), dtype=np.uint64)
    rows = np.arange(n_qubits)
    zcols[rows, rows // 64] = np.left_shift(np.uint64(1), (rows % 64).astype(np.uint64))
    return xcols, zcols


def _faf1_from_columns(xcols: np.ndarray, zcols: np.ndarray, n_qubits: int) -> float:
    prefix = np.zeros_like(xcols)
    if n_qubits > 1:
        prefix[1:] = np.bitwise_xor.accumulate(xcols, axis=0)[:-1]
    cols = np.empty((2 * n_qubits, xcols.shape[1]), dtype=np.uint64)
    cols[0::2] = zcols ^ prefix
    cols[1::2] = zcols ^ xcols ^ prefix
    _, counts = np.unique(cols, axis=0, return_counts=True)
    if counts.max() > 2:
        raise StabilizerDiagnostic(f"a Majorana mode has {counts.max() - 1} correlated partners")
    return float(n_qubits - np.count_nonzero(counts == 2))


def faf1_of_circuit(n_qubits: int, pairs: np.ndarray, gate_indices: np.ndarray, symmetric: bool) -> float:
    """``F_1`` of the circuit applied to ``|0...0>`` using the packed sign-free kernel."""
    xcols, zcols = _vacuum_columns(n_qubits)
    if len(pairs):
        mats = _group_arrays(symmetric)[np.asarray(gate_indices)]
        _run_kernel(xcols, zcols, np.ascontiguousarray(pairs, dtype=np.int64), np.ascontiguousarray(mats))
    return _faf1_from_columns(xcols, zcols, n_qubits)


def _sample_faf1(builder: CircuitBuilder, seed: int, index: int) -> float:
    rng = np.random.default_rng([seed, index])
    pairs, gates = builder.sample(rng)
    return faf1_of_circuit(builder.n_qubits, pairs, gates, builder.symmetry == "z2")


def faf1_samples(builder: CircuitBuilder, seed: int, indices: Sequence[int]) -> np.ndarray:
    """``F_1`` for the circuit realizations with the given sample indices.

    Sample ``i`` draws from the stream ``default_rng([seed, i])``, so any partition of the
    indices over workers reproduces the same values.
    """
    return np.array([_sample_faf1(builder, seed, int(i)) for i in indices], dtype=float)


def mc_faf1(builder: CircuitBuilder, samples: int, seed: int = 0) -> tuple[float, float]:
    """Mean and standard error of ``F_1`` over ``samples`` circuit realizations."""
    if samples < 2:
        raise ValueError("need at least two samples for a standard error")
    values = faf1_samples(builder, seed, range(samples))
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples))


def _sample_faf1_curve(builder: CircuitBuilder, seed: int, index: int) -> np.ndarray:
    rng = np.random.default_rng([seed, index])
    n = builder.n_qubits
    symmetric = builder.symmetry == "z2"
    table = _group_arrays(symmetric)
    size = table.shape[0]
    xcols, zcols = _vacuum_columns(n)
    out = np.empty(builder.depth + 1)
    out[0] = _faf1_from_columns(xcols, zcols, n)
    for t in range(1, builder.depth + 1):
        start = 1 if t % 2 == 1 else 2
        pairs = np.array([(q, q + 1) for q in range(start, n, 2)], dtype=np.int64).reshape(-1, 2)
        mats = np.ascontiguousarray(table[rng.integers(size, size=len(pairs))])
        _run_kernel(xcols, zcols, pairs, mats)
        out[t] = _faf1_from_columns(xcols, zcols, n)
    return out


def faf1_curve_samples(builder: CircuitBuilder, seed: int, indices: Sequence[int]) -> np.ndarray:
    """Per-layer ``F_1`` (rows: samples, columns: ``t = 0..depth``) of brickwall realizations."""
    if builder.kind != "brickwall":
        raise ValueError("depth curves are defined for brickwall circuits")
    rows = [_sample_faf1_curve(builder, seed, int(i)) for i in indices]
    return np.array(rows, dtype=float).reshape(len(rows), builder.depth + 1)


def mc_faf1_curve(builder: CircuitBuilder, samples: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of ``F_1`` after every layer ``t = 0..depth`` of a brickwall.

    Each sample follows one circuit through all its layers, so the curve is correlated
    across depths but costs a single circuit per sample.
    """
    if samples < 2:
        raise ValueError("need at least two samples for a standard error")
    values = faf1_curve_samples(builder, seed, range(samples))
    return values.mean(axis=0), values.std(axis=0, ddof=1) / math.sqrt(samples)


def rmps_faf1(n_qubits: int, r: int, samples: int, seed: int = 0, symmetry: str = "generic", layers: int | None = None) -> tuple[float, float]:
    """``F_1`` averaged over staircase (RMPS) Clifford circuits with bond dimension ``2**r``."""
    if r > 30:
        raise MemoryError("bond dimension 2**r beyond the supported range")
    builder = CircuitBuilder(n_qubits, kind="staircase", r=r, layers=layers, symmetry=symmetry)
    return mc_faf1(builder, samples, seed)


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit ``log y = log A - alpha t``."""

    alpha: float
    alpha_se: float
    amplitude: float
    residual_rms: float


def fit_decay(t: Sequence[float], y: Sequence[float]) -> DecayFit:
    """Fit an exponential decay to positive data on a log scale (at least five points)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.size < 5:
        raise ValueError("fit_decay needs at least five (t, y) points")
    if np.any(y <= 0):
        raise ValueError("decay series must be strictly positive")
    if np.ptp(t) == 0:
        raise ValueError("degenerate series: all t equal")
    (slope, intercept), cov = np.polyfit(t, np.log(y), 1, cov="unscaled")
    resid = np.log(y) - (slope * t + intercept)
    dof = max(t.size - 2, 1)
    sigma2 = float(resid @ resid) / dof
    return DecayFit(-float(slope), float(math.sqrt(cov[0, 0] * sigma2)), float(math.exp(intercept)), float(math.sqrt(np.mean(resid**2))))


def t_sat(t: Sequence[float], delta: Sequence[float], eps: float = 1.0) -> float:
    """First depth where ``delta`` drops below ``eps``, log-linearly interpolated between samples."""
    t = np.asarray(t, dtype=float)
    d = np.asarray(delta, dtype=float)
    below = np.flatnonzero(d < eps)
    if below.size == 0:
        raise ValueError(f"series never drops below eps={eps}")
    i = int(below[0])
    if i == 0:
        return float(t[0])
    d0, d1 = d[i - 1], d[i]
    if d0 > 0 and d1 > 0:
        frac = (math.log(d0) - math.log(eps)) / (math.log(d0) - math.log(d1))
    else:
        frac = (d0 - eps) / (d0 - d1)
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))


def fit_log_scaling(n_values: Sequence[float], values: Sequence[float]) -> tuple[float, float, float]:
    """Fit ``values = a + b log N``; returns ``(a, b, correlation)``."""
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.asarray(values, dtype=float)
    b, a = np.polyfit(x, y, 1)
    return float(a), float(b), float(np.corrcoef(x, y)[0, 1])


def delta_faf1(n_qubits: int, mean: float, symmetry: str = "generic") -> float:
    """Distance ``F_1^typ - mean`` to the exact Haar value of the matching sector."""
    sector = "even" if symmetry == "z2" else "generic"
    return typical_faf(n_qubits, 1, sector) - mean
