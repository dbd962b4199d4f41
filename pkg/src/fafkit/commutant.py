"""Replica operators of the fermionic Gaussian commutant and the overlaps they induce.

For a replica specification ``r = (r_1, ..., r_k)`` the overlap of a pure state is

    zeta = sum_{A_1..A_k} prod_m <psi| gamma_{A_m} gamma_{A_{m+1}} |psi>,   A_{k+1} = A_1,

where ``A_m`` runs over ``r_m``-subsets of the ``2N`` Majorana modes and cyclically
neighbouring subsets are disjoint.  Writing ``Y^{(r,s)}_{AB} = <gamma_A gamma_B>`` for
disjoint ``A, B`` (zero otherwise), the overlap is the matrix-chain trace
``tr(Y^{(r_1,r_2)} Y^{(r_2,r_3)} ... Y^{(r_k,r_1)})``.  Each ``Y`` transforms as
``C_r(G) Y C_s(G)^T`` under a Gaussian rotation ``G`` (``C_r`` is the r-th compound
matrix), so ``zeta`` is Gaussian invariant.  The measure is ``phi = N_r - zeta`` with
``N_r`` the vacuum value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import majorana_string, multiply, pauli_from_label
from .dense_state import StateVector, apply_pauli, haar_state
from .free_fermion import PlaneRotation, Reflection, apply_matchgate_circuit, matchgate_unitary, random_matchgate_circuit

__all__ = [
    "ReplicaSpec",
    "comm1_invariant_strings",
    "comm2_collapse_check",
    "comm2_collapse_factor",
    "comm2_independent_count",
    "comm2_q_operators",
    "invariance_check",
    "normalization",
    "phi_measure",
    "replica_operator",
    "zeta_overlap",
]

_BUDGET_SUM = 6
_BUDGET_N = 6


@dataclass(frozen=True)
class ReplicaSpec:
    """Number of replicas ``k >= 2`` and subset sizes ``r_1..r_k`` (cyclic)."""

    r: tuple[int, ...]

    def __post_init__(self) -> None:
        r = tuple(int(v) for v in self.r)
        if len(r) < 2:
            raise ValueError("a replica specification needs k >= 2 entries")
        if any(v < 0 for v in r) or sum(r) == 0:
            raise ValueError(f"subset sizes must be non-negative with positive sum, got {r}")
        object.__setattr__(self, "r", r)

    @property
    def k(self) -> int:
        return len(self.r)

    def pairs(self) -> list[tuple[int, int]]:
        return [(self.r[m], self.r[(m + 1) % self.k]) for m in range(self.k)]

    def check(self, n_qubits: int) -> None:
        if sum(self.r) > 2 * n_qubits:
            raise ValueError(f"sum of subset sizes {sum(self.r)} exceeds 2N = {2 * n_qubits}")
        if max(self.r) > 2 * n_qubits:
            raise ValueError("subset larger than the number of modes")
        if sum(self.r) > _BUDGET_SUM and n_qubits > _BUDGET_N:
            raise MemoryError(f"contraction budget exceeded (sum r = {sum(self.r)}, N = {n_qubits})")


def _as_spec(spec: ReplicaSpec | tuple[int, ...] | list[int]) -> ReplicaSpec:
    return spec if isinstance(spec, ReplicaSpec) else ReplicaSpec(tuple(spec))


@lru_cache(maxsize=None)
def _subsets(n_modes: int, size: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(1, n_modes + 1), size))


def _merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """Sign of sorting the concatenation ``a + b`` of two increasing, disjoint tuples."""
    inversions = sum(1 for x in a for y in b if x > y)
    return -1 if inversions % 2 else 1


class _StringExpectations:
    """Memoized ``<psi|gamma_S|psi>`` for sorted index tuples ``S``."""

    def __init__(self, psi: StateVector) -> None:
        self.psi = psi
        self.cache: dict[tuple[int, ...], complex] = {(): 1.0 + 0.0j}

    def __call__(self, s: tuple[int, ...]) -> complex:
        value = self.cache.get(s)
        if value is None:
            op = majorana_string(s, self.psi.n_qubits)
            value = complex(np.vdot(self.psi.amplitudes, apply_pauli(self.psi.amplitudes, op)))
            self.cache[s] = value
        return value


def _pair_matrix(expect: _StringExpectations, n_modes: int, r: int, s: int) -> np.ndarray:
    rows, cols = _subsets(n_modes, r), _subsets(n_modes, s)
    y = np.zeros((len(rows), len(cols)), dtype=complex)
    for i, a in enumerate(rows):
        aset = set(a)
        for j, b in enumerate(cols):
            if aset.isdisjoint(b):
                union = tuple(sorted(a + b))
                val = expect(union)
                if val != 0:
                    y[i, j] = _merge_sign(a, b) * val
    return y


def _zeta_complex(psi: StateVector, spec: ReplicaSpec) -> complex:
    spec.check(psi.n_qubits)
    n_modes = 2 * psi.n_qubits
    expect = _StringExpectations(psi)
    cache: dict[tuple[int, int], np.ndarray] = {}
    chain = None
    for pair in spec.pairs():
        if pair not in cache:
            cache[pair] = _pair_matrix(expect, n_modes, *pair)
        chain = cache[pair] if chain is None else chain @ cache[pair]
    return complex(np.trace(chain))


def zeta_overlap(psi: StateVector, spec: ReplicaSpec | tuple[int, ...], atol: float = 1e-9) -> float:
    """Fermionic overlap ``zeta`` of ``psi`` for the replica specification ``spec``."""
    spec = _as_spec(spec)
    value = _zeta_complex(psi, spec)
    if abs(value.imag) > atol * max(1.0, abs(value.real)):
        raise ArithmeticError(f"overlap has imaginary part {value.imag:.3e}")
    return float(value.real)


def normalization(n_qubits: int, spec: ReplicaSpec | tuple[int, ...]) -> float:
    """Overlap of the vacuum, shared by every Gaussian state."""
    spec = _as_spec(spec)
    if sum(spec.r) % 2:
        return 0.0
    vac = np.zeros(1 << n_qubits, dtype=complex)
    vac[0] = 1.0
    return zeta_overlap(StateVector(n_qubits, vac), spec)


def phi_measure(psi: StateVector, spec: ReplicaSpec | tuple[int, ...]) -> float:
    """Non-Gaussianity ``phi = N_r - zeta``; vanishes on Gaussian states."""
    spec = _as_spec(spec)
    return normalization(psi.n_qubits, spec) - zeta_overlap(psi, spec)


def invariance_check(
    spec: ReplicaSpec | tuple[int, ...],
    n_qubits: int,
    trials: int = 20,
    seed: int = 0,
    generator: str = "circuit",
) -> float:
    """Largest ``|zeta(U psi) - zeta(psi)|`` over random states and Gaussian unitaries.

    ``generator`` selects the unitaries: ``"circuit"`` (random matchgate circuits with
    reflections), ``"rotation"`` (one plane rotation between neighbouring modes) or
    ``"reflection"`` (the single-qubit ``X_N``).
    """
    spec = _as_spec(spec)
    rng = np.random.default_rng(seed)
    worst = 0.0
    n_modes = 2 * n_qubits
    for _ in range(trials):
        psi = haar_state(n_qubits, "generic", rng)
        if generator == "circuit":
            circuit = random_matchgate_circuit(n_qubits, 4 * n_modes, rng, reflection_rate=0.1)
        elif generator == "rotation":
            m = int(rng.integers(1, n_modes))
            circuit = [PlaneRotation(m, m + 1, float(rng.uniform(0, 2 * np.pi)))]
        elif generator == "reflection":
            circuit = [Reflection(n_modes)]
        else:
            raise ValueError(f"unknown generator {generator!r}")
        before = _zeta_complex(psi, spec)
        after = _zeta_complex(apply_matchgate_circuit(psi, circuit), spec)
        worst = max(worst, abs(after - before))
    return float(worst)


def replica_operator(n_qubits: int, spec: ReplicaSpec | tuple[int, ...]) -> np.ndarray:
    """Dense operator ``sum_{A} (x)_m gamma_{A_m} gamma_{A_{m+1}}`` on ``k`` replicas.

    Exponential in ``k N``; intended as a brute-force oracle for ``N k <= 10``.
    """
    spec = _as_spec(spec)
    spec.check(n_qubits)
    if spec.k * n_qubits > 10:
        raise MemoryError("dense replica operator limited to k*N <= 10 qubits")
    n_modes = 2 * n_qubits
    dim = 1 << n_qubits
    eye = np.eye(dim, dtype=complex)
    strings: dict[tuple[tuple[int, ...], tuple[int, ...]], np.ndarray] = {}

    def pair_op(a: tuple[int, ...], b: tuple[int, ...]) -> np.ndarray:
        key = (a, b)
        if key not in strings:
            op = multiply(majorana_string(a, n_qubits), majorana_string(b, n_qubits))
            strings[key] = apply_pauli(eye, op)
        return strings[key]

    total = np.zeros((dim**spec.k, dim**spec.k), dtype=complex)
    choices = [_subsets(n_modes, r) for r in spec.r]
    for tup in itertools.product(*choices):
        if any(not set(tup[m]).isdisjoint(tup[(m + 1) % spec.k]) for m in range(spec.k)):
            continue
        term = np.ones((1, 1), dtype=complex)
        for m in range(spec.k):
            term = np.kron(term, pair_op(tup[m], tup[(m + 1) % spec.k]))
        total += term
    return total


def comm2_collapse_factor(n_qubits: int, m: int, r: int) -> float | None:
    """Scalar ``c`` with ``Upsilon_{r,m-r} = c Upsilon_{m,0}`` (dense), or ``None`` if not proportional."""
    if not 0 <= r <= m <= 2 * n_qubits:
        raise ValueError(f"need 0 <= r <= m <= 2N, got r={r}, m={m}")
    if m == 0:
        return 1.0
    base = replica_operator(n_qubits, (m, 0))
    other = replica_operator(n_qubits, (r, m - r))
    norm = np.vdot(base, base)
    factor = np.vdot(base, other) / norm
    if np.max(np.abs(other - factor * base)) > 1e-9 * max(1.0, abs(factor)):
        return None
    if abs(factor.imag) > 1e-12:
        return None
    return float(factor.real)


def comm2_collapse_check(n_qubits: int, m: int, r: int) -> bool:
    """Whether ``Upsilon_{r,m-r}`` is proportional to ``Upsilon_{m,0}`` for ``k = 2``."""
    return comm2_collapse_factor(n_qubits, m, r) is not None


def comm2_independent_count(n_qubits: int) -> int:
    """Rank of the family ``{Upsilon_{r1,r2} : 0 < r1 + r2 <= 2N}`` plus the identity, for ``k = 2``."""
    vectors = [np.eye((1 << n_qubits) ** 2, dtype=complex).reshape(-1)]
    for total in range(1, 2 * n_qubits + 1):
        for r1 in range(total + 1):
            vectors.append(replica_operator(n_qubits, (r1, total - r1)).reshape(-1))
    return int(np.linalg.matrix_rank(np.array(vectors), tol=1e-8))


_Q_LABELS = {
    0: [("I", "I")],
    1: [("X_1", "X_1"), ("Y_1", "Y_1"), ("Z_1 X_2", "Z_1 X_2"), ("Z_1 Y_2", "Z_1 Y_2")],
    2: [
        ("Z_1", "Z_1"),
        ("Z_2", "Z_2"),
        ("X_1 X_2", "X_1 X_2"),
        ("X_1 Y_2", "X_1 Y_2"),
        ("Y_1 Y_2", "Y_1 Y_2"),
        ("Y_1 X_2", "Y_1 X_2"),
    ],
    3: [("X_2", "X_2"), ("Y_2", "Y_2"), ("X_1 Z_2", "X_1 Z_2"), ("Y_1 Z_2", "Y_1 Z_2")],
    4: [("Z_1 Z_2", "Z_1 Z_2")],
}


def comm2_q_operators() -> list[np.ndarray]:
    """The five two-qubit, two-replica operators ``Q_0..Q_4`` written out as Pauli sums."""
    out = []
    for m in range(5):
        total = np.zeros((16, 16), dtype=complex)
        for left, right in _Q_LABELS[m]:
            a = pauli_from_label("+ " + left, 2).to_matrix()
            b = pauli_from_label("+ " + right, 2).to_matrix()
            total += np.kron(a, b)
        out.append(total)
    return out


def comm1_invariant_strings(n_qubits: int, trials: int = 5, seed: int = 0) -> list[tuple[int, ...]]:
    """Majorana strings left unchanged by random Gaussian unitaries and by ``X_N``.

    Only the empty string (the identity) should survive.
    """
    rng = np.random.default_rng(seed)
    n_modes = 2 * n_qubits
    unitaries = [matchgate_unitary(random_matchgate_circuit(n_qubits, 3 * n_modes, rng, 0.0), n_qubits) for _ in range(trials)]
    unitaries.append(matchgate_unitary([Reflection(n_modes)], n_qubits))
    survivors = []
    eye = np.eye(1 << n_qubits, dtype=complex)
    for size in range(n_modes + 1):
        for s in _subsets(n_modes, size):
            op = apply_pauli(eye, majorana_string(s, n_qubits)) if s else eye
            if all(np.allclose(u @ op @ u.conj().T, op, atol=1e-9) for u in unitaries):
                survivors.append(s)
    return survivors

