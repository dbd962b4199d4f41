"""Quadratic Majorana Hamiltonians and fermionic Gaussian unitaries.

A quadratic Hamiltonian is stored through the real antisymmetric matrix ``H``
in ``H_+ = (i/4) sum_mn H_mn gamma_m gamma_n``.  A Gaussian unitary ``U_G``
acts on Majorana operators as ``U_G^dag gamma_m U_G = sum_n G_mn gamma_n``
and on covariance matrices as ``M -> G M G^T``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .algebra import jordan_wigner, multiply, parity_operator
from .dense_state import StateVector, apply_pauli
from .nongauss import check_covariance

__all__ = [
    "DegenerateGroundState",
    "GaussianGroundState",
    "PlaneRotation",
    "QuadraticHamiltonian",
    "Reflection",
    "apply_matchgate_circuit",
    "canonical_form",
    "duality_permutation",
    "gaussian_ground_state",
    "ground_covariance",
    "ising_critical_correlator",
    "matchgate_to_orthogonal",
    "matchgate_unitary",
    "pe_covariance",
    "pe_dual_covariance",
    "random_matchgate_circuit",
    "tfim_hamiltonian",
]


class DegenerateGroundState(UserWarning):
    """The Gaussian ground state is not unique (a single-particle energy vanishes)."""


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H_+ = (i/4) sum H_mn gamma_m gamma_n`` with ``H`` real antisymmetric."""

    h: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] % 2:
            raise ValueError(f"H must be a 2N x 2N matrix, got shape {h.shape}")
        if np.max(np.abs(h + h.T), initial=0.0) > 1e-12:
            raise ValueError("H must be antisymmetric")
        object.__setattr__(self, "h", h)

    @property
    def n_qubits(self) -> int:
        return self.h.shape[0] // 2

    def to_dense(self) -> np.ndarray:
        """Dense ``2**N`` matrix of ``H_+`` in the qubit basis (small N only)."""
        n = self.n_qubits
        dim = 1 << n
        eye = np.eye(dim, dtype=complex)
        out = np.zeros((dim, dim), dtype=complex)
        for a in range(2 * n):
            for b in range(a + 1, 2 * n):
                if self.h[a, b] != 0.0:
                    op = multiply(jordan_wigner(a + 1, n), jordan_wigner(b + 1, n))
                    # (i/4)(H_ab g_a g_b + H_ba g_b g_a) = (i/2) H_ab g_a g_b
                    out += 0.5j * self.h[a, b] * apply_pauli(eye, op)
        return out


@dataclass(frozen=True)
class PlaneRotation:
    """``V_mn(theta) = exp(theta gamma_m gamma_n / 2)``, a rotation by ``theta`` in the (m, n) plane."""

    m: int
    n: int
    theta: float

    def __post_init__(self) -> None:
        if not 1 <= self.m < self.n:
            raise ValueError(f"rotation axes must satisfy 1 <= m < n, got ({self.m}, {self.n})")


@dataclass(frozen=True)
class Reflection:
    """Gaussian unitary that flips the sign of the single Majorana ``gamma_mode``.

    For ``mode = 2N`` this is the qubit operator ``X_N`` (up to a phase).
    """

    mode: int

    def __post_init__(self) -> None:
        if self.mode < 1:
            raise ValueError("mode must be positive")


Gate = Union[PlaneRotation, Reflection]


def _givens(n_modes: int, gate: Gate) -> np.ndarray:
    g = np.eye(n_modes)
    if isinstance(gate, PlaneRotation):
        if gate.n > n_modes:
            raise ValueError(f"rotation axis {gate.n} exceeds {n_modes} modes")
        a, b = gate.m - 1, gate.n - 1
        c, s = math.cos(gate.theta), math.sin(gate.theta)
        g[a, a] = g[b, b] = c
        g[a, b], g[b, a] = s, -s
    else:
        if gate.mode > n_modes:
            raise ValueError(f"reflection mode {gate.mode} exceeds {n_modes} modes")
        g[gate.mode - 1, gate.mode - 1] = -1.0
    return g


def matchgate_to_orthogonal(circuit: Sequence[Gate], n_qubits: int) -> np.ndarray:
    """Orthogonal ``G`` of a circuit whose gates are applied in list order.

    Conjugation composes in reverse, so ``G = G_L ... G_2 G_1``.
    """
    n_modes = 2 * n_qubits
    g = np.eye(n_modes)
    for gate in circuit:
        g = _givens(n_modes, gate) @ g
    return g


def apply_matchgate_circuit(psi: StateVector, circuit: Iterable[Gate]) -> StateVector:
    """Dense-state realization of a matchgate circuit (exact, via Pauli strings)."""
    n = psi.n_qubits
    amps = psi.amplitudes
    parity = parity_operator(n)
    for gate in circuit:
        if isinstance(gate, PlaneRotation):
            # (gamma_m gamma_n)^2 = -1, so the exponential is cos + sin * (gamma_m gamma_n).
            op = multiply(jordan_wigner(gate.m, n), jordan_wigner(gate.n, n))
            amps = math.cos(gate.theta / 2) * amps + math.sin(gate.theta / 2) * apply_pauli(amps, op)
        else:
            # P gamma_j anticommutes with gamma_j and commutes with every other Majorana.
            amps = apply_pauli(amps, multiply(parity, jordan_wigner(gate.mode, n)))
    return StateVector(n, amps / np.linalg.norm(amps))


def matchgate_unitary(circuit: Iterable[Gate], n_qubits: int) -> np.ndarray:
    """Dense unitary of a matchgate circuit (columns evolved one gate at a time)."""
    mat = np.eye(1 << n_qubits, dtype=complex)
    parity = parity_operator(n_qubits)
    for gate in circuit:
        if isinstance(gate, PlaneRotation):
            op = multiply(jordan_wigner(gate.m, n_qubits), jordan_wigner(gate.n, n_qubits))
            mat = math.cos(gate.theta / 2) * mat + math.sin(gate.theta / 2) * apply_pauli(mat, op)
        else:
            mat = apply_pauli(mat, multiply(parity, jordan_wigner(gate.mode, n_qubits)))
    return mat


def random_matchgate_circuit(
    n_qubits: int,
    n_gates: int,
    rng: np.random.Generator,
    reflection_rate: float = 0.05,
) -> list[Gate]:
    """Random plane rotations with uniform angles, sprinkled with single-mode reflections."""
    n_modes = 2 * n_qubits
    gates: list[Gate] = []
    for _ in range(n_gates):
        if rng.random() < reflection_rate:
            gates.append(Reflection(int(rng.integers(1, n_modes + 1))))
        else:
            m, n = sorted(rng.choice(n_modes, size=2, replace=False) + 1)
            gates.append(PlaneRotation(int(m), int(n), float(rng.uniform(0, 2 * np.pi))))
    return gates


def canonical_form(h: QuadraticHamiltonian | np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonalize ``H = G^T [+]_m [[0, e_m], [-e_m, 0]] G`` with ``e_m >= 0`` descending.

    The positive eigenvalues of the Hermitian matrix ``iH`` give ``e_m``.  For an
    eigenvector ``v = (a + i b)/sqrt(2)`` one has ``H a = e b`` and ``H b = -e a``,
    so ``(b, a)`` are the two rows of ``G`` belonging to block ``m``.  The null space
    is paired up from an orthonormal real basis.
    """
    mat = h.h if isinstance(h, QuadraticHamiltonian) else QuadraticHamiltonian(h).h
    n_modes = mat.shape[0]
    n = n_modes // 2
    evals, evecs = np.linalg.eigh(1j * mat)
    scale = max(1.0, float(np.max(np.abs(evals), initial=0.0)))
    positive = evals > tol * scale
    rows: list[np.ndarray] = []
    eps: list[float] = []
    for idx in np.flatnonzero(positive)[::-1]:
        v = evecs[:, idx] * math.sqrt(2)
        rows.extend([v.imag, v.real])
        eps.append(float(evals[idx]))
    n_zero_blocks = n - len(eps)
    if n_zero_blocks:
        zero_vecs = evecs[:, np.abs(evals) <= tol * scale]
        real_span = np.concatenate([zero_vecs.real, zero_vecs.imag], axis=1)
        u, s, _ = np.linalg.svd(real_span, full_matrices=False)
        basis = u[:, : 2 * n_zero_blocks]
        rows.extend(basis.T)
        eps.extend([0.0] * n_zero_blocks)
    g = np.array(rows)
    # Re-orthonormalize against round-off inside degenerate subspaces.
    q, r = np.linalg.qr(g.T)
    g = (q * np.sign(np.diag(r))).T
    return g, np.array(eps)


@dataclass(frozen=True)
class GaussianGroundState:
    """Ground state of a quadratic Hamiltonian restricted to a parity sector."""

    covariance: np.ndarray
    energy: float
    parity: int
    unique: bool


def gaussian_ground_state(h: QuadraticHamiltonian | np.ndarray, parity: int | None = 1, tol: float = 1e-10) -> GaussianGroundState:
    """Lowest-energy Gaussian eigenstate, optionally constrained to parity ``+1`` or ``-1``.

    With ``gamma' = G gamma`` the Hamiltonian reads ``(i/2) sum_m e_m gamma'_{2m-1} gamma'_{2m}``,
    minimized by ``<-i gamma'_{2m-1} gamma'_{2m}> = 1``, i.e. ``M = G^T M_0 G`` with energy
    ``-sum(e)/2``.  Its parity is ``Pf(M) = det(G)``; if that is the wrong sector, the
    softest mode is flipped, which costs ``e_min``.
    """
    g, eps = canonical_form(h, tol)
    n = eps.size
    occupation = np.ones(n)
    det = float(np.sign(np.linalg.det(g)))
    energy = -0.5 * float(np.sum(eps))
    if parity is not None and parity not in (1, -1):
        raise ValueError("parity must be +1, -1 or None")
    if parity is not None and det != parity:
        occupation[-1] = -1.0
        energy += float(eps[-1])
        det = -det
    block = np.kron(np.diag(occupation), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    m = g.T @ block @ g
    scale = max(1.0, float(eps[0]) if n else 1.0)
    unique = bool(n == 0 or eps[-1] > tol * scale)
    if parity is not None and n > 1 and occupation[-1] < 0:
        unique = unique and bool(eps[-2] - eps[-1] > tol * scale)
    return GaussianGroundState(0.5 * (m - m.T), energy, int(det), unique)


def ground_covariance(h: QuadraticHamiltonian | np.ndarray, parity: int | None = 1) -> np.ndarray:
    """Covariance matrix of the (parity-constrained) ground state; warns when it is not unique."""
    result = gaussian_ground_state(h, parity)
    if not result.unique:
        warnings.warn("degenerate single-particle spectrum: ground state is not unique", DegenerateGroundState, stacklevel=2)
    return result.covariance


def tfim_hamiltonian(n_qubits: int, h_z: float, bc: str = "open", g: float | None = None) -> QuadraticHamiltonian:
    """Transverse-field Ising chain ``-h_z sum Z - sum X_m X_{m+1} - g X_N X_1`` in the even sector.

    Field terms give ``H_{2m-1,2m} = 2 h_z`` and bonds ``H_{2m,2m+1} = 2``.  In the
    positive-parity sector the closing bond ``-X_N X_1`` equals ``+i gamma_1 gamma_{2N}``,
    hence ``H_{1,2N} = 2 g``.
    """
    if n_qubits < 2:
        raise ValueError("the chain needs at least two sites")
    if bc not in ("open", "periodic"):
        raise ValueError(f"bc must be 'open' or 'periodic', got {bc!r}")
    if g is None:
        g = 1.0 if bc == "periodic" else 0.0
    n_modes = 2 * n_qubits
    h = np.zeros((n_modes, n_modes))
    for m in range(n_qubits):
        h[2 * m, 2 * m + 1] = 2.0 * h_z
    for m in range(n_qubits - 1):
        h[2 * m + 1, 2 * m + 2] = 2.0
    if bc == "periodic":
        h[0, n_modes - 1] = 2.0 * g
    return QuadraticHamiltonian(h - h.T)


def ising_critical_correlator(n_qubits: int, r: float) -> float:
    """``|<gamma_i gamma_{i+2r}>|`` of the critical periodic Ising chain (``h_z = 1``)."""
    two_r = round(2 * r)
    if abs(2 * r - two_r) > 1e-12:
        raise ValueError(f"r must be an integer or half-integer, got {r}")
    if not 0 < r < n_qubits:
        raise ValueError(f"r must satisfy 0 < r < N, got {r}")
    if two_r % 2 == 0:
        return 0.0
    return 1.0 / (n_qubits * math.sin(math.pi * r / n_qubits))


def _pe_parameters(lam: float) -> tuple[float, float]:
    if not 0 < lam < 0.5:
        raise ValueError(f"the Peschel-Emery construction needs 0 < lambda < 1/2, got {lam}")
    h_pe = 1.0 / (4.0 * lam) - lam
    cos_theta = -1.0 / (2.0 * (h_pe + lam))
    return h_pe, cos_theta


def pe_dual_covariance(n_qubits: int, lam: float) -> np.ndarray:
    """Covariance of the product-cat state ``sqrt(a_N/2)(|theta>^N + |-theta>^N)`` from closed forms.

    With ``c = cos(theta)`` and ``a_N = 1/(1 + c^N)``, for sites ``i < j`` at distance ``k``:
    ``M_{2i-1,2i} = a_N (c + c^(N-1))``, ``M_{2i-1,2j} = a_N (1-c^2) c^(N-k-1)`` and
    ``M_{2i,2j-1} = a_N (1-c^2) c^(k-1)``.
    """
    _, c = _pe_parameters(lam)
    n = n_qubits
    a_n = 1.0 / (1.0 + c**n)
    s2 = 1.0 - c * c
    m = np.zeros((2 * n, 2 * n))
    for i in range(n):
        m[2 * i, 2 * i + 1] = a_n * (c + c ** (n - 1))
        for j in range(i + 1, n):
            k = j - i
            m[2 * i, 2 * j + 1] = a_n * s2 * c ** (n - k - 1)
            m[2 * i + 1, 2 * j] = a_n * s2 * c ** (k - 1)
    return m - m.T


def duality_permutation(n_qubits: int) -> np.ndarray:
    """Orthogonal ``D`` with ``gamma_m -> gamma_{m-1}`` for ``m >= 2`` and ``gamma_1 -> -gamma_{2N}``.

    The sign on the wrapped mode realizes the antiperiodic closure of the even-parity sector.
    """
    n_modes = 2 * n_qubits
    d = np.zeros((n_modes, n_modes))
    for m in range(1, n_modes):
        d[m - 1, m] = 1.0
    d[n_modes - 1, 0] = -1.0
    return d


def pe_covariance(n_qubits: int, lam: float) -> tuple[float, np.ndarray]:
    """Peschel-Emery field and ground-state covariance of the periodic ANNNI chain.

    The closed-form dual-frame matrix is mapped back by the duality permutation followed
    by a site-staggered sign gauge (conjugation by ``Z`` on every second site, which flips
    the sign of ``cos(theta)`` between the two frames).
    """
    h_pe, _ = _pe_parameters(lam)
    if n_qubits < 2:
        raise ValueError("need at least two sites")
    dual = pe_dual_covariance(n_qubits, lam)
    perm = duality_permutation(n_qubits)
    gauge = np.diag([(-1.0) ** ((m // 2) % 2) for m in range(2 * n_qubits)])
    transform = gauge @ perm
    m = transform @ dual @ transform.T
    return h_pe, check_covariance(0.5 * (m - m.T))

