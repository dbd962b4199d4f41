"""Exact diagonalization and Chebyshev dynamics in the even-parity sector.

Models (all with ``J = 1``):

* ``tfim``:     ``H_0 = -h_z sum Z_m - sum X_m X_{m+1} - g X_N X_1``
* ``impurity``: ``H_0 + lam X_l X_{l+2}`` (equal to ``-lam gamma_{2l} ... gamma_{2l+3}``), ``l = N/2``
* ``annni``:    ``H_0 + lam sum X_m X_{m+2} + lam g (X_{N-1} X_1 + X_N X_2)``

``g = 1`` for periodic and ``g = 0`` for open boundaries.  The even sector holds the
computational states with an even number of ``1`` bits (``P = prod Z = +1``), listed
in increasing integer order; a dense rank table maps a full-space index to its
position in the sector.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq
from scipy.special import jv

from .algebra import PauliOperator, jordan_wigner, multiply, pauli_from_label
from .dense_state import StateVector, covariance_matrix, entanglement_entropy
from .free_fermion import canonical_form, tfim_hamiltonian
from .nongauss import faf

__all__ = [
    "EDBudgetError",
    "EigenRecord",
    "PerturbationDiagnostic",
    "SaturationResult",
    "SpinHamiltonian",
    "binder_crossing",
    "binder_cumulant",
    "build_hamiltonian",
    "chebyshev_evolve",
    "dk_fk_extract",
    "dynamics_faf",
    "even_sector_basis",
    "extrapolate_crossings",
    "faf_derivative",
    "full_spectrum_scan",
    "ground_energy_and_state",
    "ground_state",
    "linear_growth_fit",
    "mid_spectrum_mean",
    "perturbative_ground_state",
    "saturation_analysis",
]

_MAX_SECTOR_DIM = 1 << 21
_DENSE_CUTOFF = 256


class EDBudgetError(MemoryError):
    """The requested system is larger than the configured budget."""


class PerturbationDiagnostic(UserWarning):
    """A (near-)degenerate energy denominator was dropped from the perturbative sum."""


def even_sector_basis(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """``(states, rank)``: even-popcount integers in increasing order and the inverse map (``-1`` outside)."""
    full = np.arange(1 << n_qubits, dtype=np.int64)
    even = (np.bitwise_count(full) & 1) == 0
    states = full[even]
    rank = np.full(1 << n_qubits, -1, dtype=np.int64)
    rank[states] = np.arange(states.size)
    return states, rank


def _xx(n: int, a: int, b: int) -> PauliOperator:
    return pauli_from_label(f"+ X_{a} X_{b}", n)


@dataclass
class SpinHamiltonian:
    """Sparse even-sector Hamiltonian with its Pauli term list."""

    model: str
    n_qubits: int
    h_z: float
    bc: str
    lam: float = 0.0
    l0: int | None = None
    terms: list[tuple[float, PauliOperator]] = field(default_factory=list, repr=False)
    matrix: sp.csr_matrix | None = field(default=None, repr=False)
    basis: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return 1 << (self.n_qubits - 1)

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Sector vector (or matrix of column vectors) to the full ``2**N`` space."""
        out = np.zeros((1 << self.n_qubits,) + vec.shape[1:], dtype=complex)
        out[self.basis] = vec
        return out

    def restrict(self, amps: np.ndarray) -> np.ndarray:
        return np.asarray(amps)[self.basis]

    def energy(self, psi: StateVector) -> float:
        v = self.restrict(psi.amplitudes)
        return float(np.real(np.vdot(v, self.matrix @ v)))


def _model_terms(model: str, n: int, h_z: float, bc: str, lam: float, l0: int | None) -> list[tuple[float, PauliOperator]]:
    terms: list[tuple[float, PauliOperator]] = []
    g = 1.0 if bc == "periodic" else 0.0
    for m in range(1, n + 1):
        terms.append((-h_z, pauli_from_label(f"+ Z_{m}", n)))
    for m in range(1, n):
        terms.append((-1.0, _xx(n, m, m + 1)))
    if g:
        terms.append((-g, _xx(n, 1, n)))
    if model == "impurity":
        terms.append((lam, _xx(n, l0, l0 + 2)))
    elif model == "annni":
        for m in range(1, n - 1):
            terms.append((lam, _xx(n, m, m + 2)))
        if g:
            terms.append((lam * g, _xx(n, 1, n - 1)))
            terms.append((lam * g, _xx(n, 2, n)))
    return terms


def _sector_matrix(n: int, terms: Sequence[tuple[float, PauliOperator]], states: np.ndarray, rank: np.ndarray) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    col_index = np.arange(states.size)
    for coef, op in terms:
        target = rank[states ^ op.x_mask]
        if np.any(target < 0):
            raise ValueError(f"term {op} does not conserve parity")
        signs = 1 - 2 * (np.bitwise_count(states & op.z_mask) & 1).astype(np.int64)
        amp = coef * (1j**op.phase_power) * signs
        rows.append(target)
        cols.append(col_index)
        vals.append(amp)
    data = np.concatenate(vals)
    if np.max(np.abs(data.imag), initial=0.0) > 1e-14:
        raise ValueError("Hamiltonian terms are not real in the computational basis")
    mat = sp.csr_matrix((data.real, (np.concatenate(rows), np.concatenate(cols))), shape=(states.size, states.size))
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


def build_hamiltonian(
    model: str,
    n_qubits: int,
    h_z: float,
    lam: float = 0.0,
    bc: str = "open",
    l0: int | None = None,
    sector: str = "even",
) -> SpinHamiltonian:
    """Assemble one of ``tfim``, ``impurity``, ``annni`` in the even-parity sector."""
    if sector != "even":
        raise NotImplementedError("only the even-parity sector is supported")
    if model not in ("tfim", "impurity", "annni"):
        raise ValueError(f"unknown model {model!r}")
    if bc not in ("open", "periodic"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    if n_qubits < 2 or (model != "tfim" and n_qubits < 4):
        raise ValueError(f"{model} needs more qubits (got N={n_qubits})")
    if 1 << (n_qubits - 1) > _MAX_SECTOR_DIM:
        raise EDBudgetError(f"sector dimension 2^{n_qubits - 1} exceeds the ED budget")
    if model == "impurity":
        l0 = n_qubits // 2 if l0 is None else int(l0)
        if not 1 <= l0 <= n_qubits - 2:
            raise ValueError(f"impurity site l0={l0} out of range")
    terms = _model_terms(model, n_qubits, float(h_z), bc, float(lam), l0)
    states, rank = even_sector_basis(n_qubits)
    mat = _sector_matrix(n_qubits, terms, states, rank)
    return SpinHamiltonian(model, n_qubits, float(h_z), bc, float(lam), l0, terms, mat, states)


def ground_energy_and_state(h: SpinHamiltonian, tol: float = 1e-8) -> tuple[float, np.ndarray]:
    """Lowest eigenpair in the sector (sector-basis vector)."""
    if h.dim <= _DENSE_CUTOFF:
        vals, vecs = np.linalg.eigh(h.matrix.toarray())
        energy, vec = float(vals[0]), vecs[:, 0]
    else:
        rng = np.random.default_rng(12345)
        v0 = rng.standard_normal(h.dim)
        vals, vecs = spla.eigsh(h.matrix, k=1, which="SA", v0=v0, tol=1e-13, maxiter=20000)
        energy, vec = float(vals[0]), vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(h.matrix @ vec - energy * vec))
    if residual > tol:
        raise ArithmeticError(f"ground state residual {residual:.2e} exceeds {tol:.0e}")
    return energy, vec


def ground_state(h: SpinHamiltonian) -> StateVector:
    """Ground state embedded in the full ``2**N`` space."""
    _, vec = ground_energy_and_state(h)
    return StateVector(h.n_qubits, h.embed(vec))


# ---------------------------------------------------------------------------
# Sector-level observables
# ---------------------------------------------------------------------------


def _bilinear_tables(n: int, states: np.ndarray, rank: np.ndarray) -> list[tuple[int, int, np.ndarray, np.ndarray]]:
    """For each pair ``a < b``: sector permutation and coefficients of ``-i gamma_a gamma_b``."""
    out = []
    for a in range(1, 2 * n + 1):
        ga = jordan_wigner(a, n)
        for b in range(a + 1, 2 * n + 1):
            op = multiply(ga, jordan_wigner(b, n)).scaled(3)
            target = rank[states ^ op.x_mask]
            signs = 1 - 2 * (np.bitwise_count(states & op.z_mask) & 1).astype(np.int64)
            coeff = (1j**op.phase_power) * signs
            out.append((a - 1, b - 1, target, coeff))
    return out


def _covariances(n: int, vecs: np.ndarray, states: np.ndarray, rank: np.ndarray) -> np.ndarray:
    """Covariance matrices of the sector column vectors ``vecs``; shape ``(n_states, 2N, 2N)``."""
    n_states = vecs.shape[1]
    cov = np.zeros((n_states, 2 * n, 2 * n))
    for a, b, target, coeff in _bilinear_tables(n, states, rank):
        # <v| op |v> = sum_s conj(v[target[s]]) coeff[s] v[s]
        val = np.einsum("si,s,si->i", vecs[target].conj(), coeff, vecs)
        cov[:, a, b] = val.real
        cov[:, b, a] = -val.real
    return cov


def _faf_batch(cov: np.ndarray, ks: Iterable[int]) -> dict[int, np.ndarray]:
    n = cov.shape[1] // 2
    s = np.linalg.svd(cov, compute_uv=False)
    return {k: n - 0.5 * np.sum(s ** (2 * k), axis=1) for k in ks}


@dataclass(frozen=True)
class EigenRecord:
    """Per-eigenstate observables from a full spectrum scan."""

    energy: float
    faf: tuple[float, ...]
    entanglement: float
    parity: float


def full_spectrum_scan(h: SpinHamiltonian, ks: Sequence[int] = (1, 2), max_qubits: int = 13, indices: Sequence[int] | None = None) -> list[EigenRecord]:
    """Dense diagonalization with ``F_k``, half-chain entropy and parity per eigenstate.

    ``indices`` restricts the observables to a subset of eigenstates (by energy rank).
    """
    if h.n_qubits > max_qubits:
        raise EDBudgetError(f"full spectrum scan limited to N <= {max_qubits}")
    vals, vecs = scipy.linalg.eigh(h.matrix.toarray())
    if indices is None:
        indices = range(vals.size)
    idx = np.asarray(list(indices), dtype=np.int64)
    sel = vecs[:, idx].astype(complex)
    states, rank = h.basis, even_sector_basis(h.n_qubits)[1]
    fafs = _faf_batch(_covariances(h.n_qubits, sel, states, rank), ks)
    cut = h.n_qubits // 2
    records = []
    for col, i in enumerate(idx):
        psi = StateVector(h.n_qubits, h.embed(sel[:, col]))
        parity = float(np.sum(np.abs(sel[:, col]) ** 2))  # sector vectors are parity eigenstates
        records.append(EigenRecord(float(vals[i]), tuple(float(fafs[k][col]) for k in ks), entanglement_entropy(psi, cut), parity))
    return records


def mid_spectrum_mean(records: Sequence[EigenRecord], n_qubits: int, k_index: int = 0, count: int | None = None) -> float:
    """Mean ``F_k`` over the ``min(1000, 2**N / 20)`` eigenstates closest to ``E = 0``."""
    if count is None:
        count = min(1000, (1 << n_qubits) // 20)
    energies = np.array([r.energy for r in records])
    order = np.argsort(np.abs(energies))[:count]
    return float(np.mean([records[i].faf[k_index] for i in order]))


def binder_cumulant(psi: StateVector) -> float:
    """``B = 1 - <M^4> / (3 <M^2>^2)`` with ``M = sum_m X_m``."""
    n = psi.n_qubits
    amps = psi.amplitudes
    basis = np.arange(amps.size)

    def apply_m(v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        for q in range(n):
            out += v[basis ^ (1 << q)]
        return out

    m1 = apply_m(amps)
    m2 = float(np.vdot(m1, m1).real)
    m4 = float(np.vdot(apply_m(m1), apply_m(m1)).real)
    return 1.0 - m4 / (3.0 * m2 * m2)


def binder_crossing(model: Mapping[str, object], sizes: tuple[int, int], bracket: tuple[float, float], xtol: float = 1e-6) -> float:
    """Field where the Binder curves of two sizes cross (Brent's method inside ``bracket``)."""
    params = dict(model)

    def diff(h_z: float) -> float:
        vals = [binder_cumulant(ground_state(build_hamiltonian(n_qubits=n, h_z=h_z, **params))) for n in sizes]
        return vals[0] - vals[1]

    return float(brentq(diff, *bracket, xtol=xtol))


def _pauli_sparse(op: PauliOperator) -> sp.csr_matrix:
    """Full-space sparse matrix of a Pauli operator."""
    dim = 1 << op.n_qubits
    basis = np.arange(dim)
    signs = 1 - 2 * (np.bitwise_count(basis & op.z_mask) & 1).astype(np.int64)
    return sp.csr_matrix(((1j**op.phase_power) * signs, (basis ^ op.x_mask, basis)), shape=(dim, dim))


def extrapolate_crossings(mean_sizes: Sequence[float], crossings: Sequence[float], power: float = 2.0) -> tuple[float, float]:
    """Fit ``h*(N) = h_c + A / N**power``; returns ``(h_c, A)``."""
    x = np.asarray(mean_sizes, dtype=float) ** (-power)
    y = np.asarray(crossings, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two crossings to extrapolate")
    a, h_c = np.polyfit(x, y, 1)
    return float(h_c), float(a)


# ---------------------------------------------------------------------------
# Ground-state FAF scans
# ---------------------------------------------------------------------------

StateFamily = Callable[[int], StateVector]


def _state_for(model: Mapping[str, object] | StateFamily, n: int, h_z: float | None = None) -> StateVector:
    if callable(model):
        return model(n)
    params = dict(model)
    if h_z is not None:
        params["h_z"] = h_z
    return ground_state(build_hamiltonian(n_qubits=n, **params))


def dk_fk_extract(
    model: Mapping[str, object] | StateFamily,
    k: int,
    sizes: tuple[int, int],
    h_z: float | None = None,
    strict: bool = True,
) -> tuple[float, float]:
    """Leading and subleading coefficients of ``F_k(N) = D_k N + f_k`` from two sizes.

    ``model`` is either keyword arguments for :func:`build_hamiltonian` (without ``n_qubits``)
    or a callable ``N -> StateVector``.  With ``strict`` the sizes must satisfy
    ``N_2 - N_1 <= N_1 / 8``.
    """
    n1, n2 = sizes
    if n1 == n2:
        raise ValueError("sizes must differ")
    if strict and abs(n2 - n1) > n1 / 8:
        raise ValueError(f"sizes {sizes} are too far apart (need N2 - N1 <= N1/8)")
    f1 = faf(covariance_matrix(_state_for(model, n1, h_z)), k)
    f2 = faf(covariance_matrix(_state_for(model, n2, h_z)), k)
    d = (f2 - f1) / (n2 - n1)
    return float(d), float(f1 - d * n1)


def faf_derivative(model: Mapping[str, object], k: int, h_z: float, n_qubits: int, dh: float = 1e-3) -> float:
    """Central finite difference ``dF_k/dh_z`` of the ground-state antiflatness."""
    plus = faf(covariance_matrix(_state_for(model, n_qubits, h_z + dh)), k)
    minus = faf(covariance_matrix(_state_for(model, n_qubits, h_z - dh)), k)
    return float((plus - minus) / (2 * dh))


# ---------------------------------------------------------------------------
# Perturbation theory around the free chain
# ---------------------------------------------------------------------------


def _free_eigenbasis(n: int, h_z: float, bc: str) -> tuple[np.ndarray, np.ndarray]:
    """Even-sector many-body eigenbasis of the free chain built from Bogoliubov modes.

    Returns ``(energies, vectors)`` with vectors as columns in the full ``2**N`` space.
    """
    quad = tfim_hamiltonian(n, h_z, bc)
    g, eps = canonical_form(quad)
    h0 = build_hamiltonian("tfim", n, h_z, bc=bc)
    e0, vac = ground_energy_and_state(h0)
    vacuum = h0.embed(vac)
    gammas = [_pauli_sparse(jordan_wigner(a, n)) for a in range(1, 2 * n + 1)]
    modes = {}

    def mode_op(vec: np.ndarray, j: int, sign: float) -> np.ndarray:
        """``(gamma'_{2j-1} + sign * i gamma'_{2j}) / 2`` applied to ``vec``."""
        key = (j, sign)
        if key not in modes:
            modes[key] = sum(0.5 * (g[2 * j, a] + sign * 1j * g[2 * j + 1, a]) * op for a, op in enumerate(gammas)).tocsr()
        return modes[key] @ vec

    # Pick the sign that annihilates the vacuum for every mode.
    sign = 1.0 if np.linalg.norm(mode_op(vacuum, 0, 1.0)) < np.linalg.norm(mode_op(vacuum, 0, -1.0)) else -1.0
    for j in range(n):
        if np.linalg.norm(mode_op(vacuum, j, sign)) > 1e-8 and eps[j] > 1e-10:
            raise ArithmeticError("free-fermion vacuum is not annihilated by the Bogoliubov modes")
    creation_sign = -sign
    energies = {0: e0}
    vectors = {0: vacuum}
    for subset in range(1, 1 << n):
        if bin(subset).count("1") % 2:
            continue
        # Build |S> = b_j1^dag b_j2^dag ... |0> recursively from a smaller even subset.
        top = subset.bit_length() - 1
        rest = subset & ~(1 << top)
        second = rest.bit_length() - 1
        base = rest & ~(1 << second)
        v = mode_op(mode_op(vectors[base], second, creation_sign), top, creation_sign)
        vectors[subset] = v / np.linalg.norm(v)
        energies[subset] = e0 + sum(eps[j] for j in range(n) if subset >> j & 1)
    keys = sorted(vectors)
    return np.array([energies[s] for s in keys]), np.stack([vectors[s] for s in keys], axis=1)


def perturbative_ground_state(n_qubits: int, h_z: float, lam: float, bc: str = "open", l0: int | None = None, degeneracy_tol: float = 1e-10) -> StateVector:
    """Impurity ground state to second order in ``lam`` from free-fermion eigenstates.

    ``|psi> = |0> + lam R V|0> + lam^2 (R V R V|0> - V_00 R^2 V|0> - <0|V R^2 V|0>/2 |0>)``
    with ``R = sum_{n != 0} |n><n| / (E_0 - E_n)``.
    """
    l0 = n_qubits // 2 if l0 is None else l0
    energies, vecs = _free_eigenbasis(n_qubits, h_z, bc)
    v_op = _pauli_sparse(_xx(n_qubits, l0, l0 + 2))
    denom = energies[0] - energies
    keep = np.abs(denom) > degeneracy_tol
    keep[0] = False
    if np.count_nonzero(~keep) > 1:
        warnings.warn(f"{np.count_nonzero(~keep) - 1} degenerate denominators dropped", PerturbationDiagnostic, stacklevel=2)
    inv = np.where(keep, 1.0 / np.where(keep, denom, 1.0), 0.0)

    def resolvent(v: np.ndarray) -> np.ndarray:
        return vecs @ (inv * (vecs.conj().T @ v))

    ground = vecs[:, 0]
    v0 = v_op @ ground
    v00 = np.vdot(ground, v0)
    first = resolvent(v0)
    second = resolvent(v_op @ first) - v00 * resolvent(first) - 0.5 * np.vdot(first, first) * ground
    psi = ground + lam * first + lam**2 * second
    return StateVector.from_amplitudes(psi)


# ---------------------------------------------------------------------------
# Chebyshev propagation
# ---------------------------------------------------------------------------


def _spectral_bounds(mat: sp.csr_matrix, margin: float = 0.01) -> tuple[float, float]:
    if mat.shape[0] <= _DENSE_CUTOFF:
        vals = np.linalg.eigvalsh(mat.toarray())
        lo, hi = float(vals[0]), float(vals[-1])
    else:
        v0 = np.random.default_rng(7).standard_normal(mat.shape[0])
        lo = float(spla.eigsh(mat, k=1, which="SA", v0=v0, tol=1e-8, return_eigenvectors=False)[0])
        hi = float(spla.eigsh(mat, k=1, which="LA", v0=v0, tol=1e-8, return_eigenvectors=False)[0])
    pad = margin * max(hi - lo, 1e-12)
    return lo - pad, hi + pad


def chebyshev_evolve(
    mat: sp.spmatrix | SpinHamiltonian,
    vec: np.ndarray,
    t: float,
    tol: float = 1e-12,
    bounds: tuple[float, float] | None = None,
    max_order: int = 200_000,
) -> np.ndarray:
    """``exp(-i H t) vec`` via a Chebyshev expansion of the rescaled Hamiltonian."""
    if isinstance(mat, SpinHamiltonian):
        mat = mat.matrix
    vec = np.asarray(vec, dtype=complex)
    if t == 0:
        return vec.copy()
    lo, hi = _spectral_bounds(mat) if bounds is None else bounds
    half, mid = (hi - lo) / 2, (hi + lo) / 2
    x = half * t
    order = int(abs(x) + 10 * math.log(max(abs(x), 1.0)) + 30)
    while order < max_order and abs(jv(order, x)) > tol * 1e-3:
        order = int(order * 1.2) + 10
    if order >= max_order:
        raise ArithmeticError("Chebyshev order cap reached; split the time step")
    coeffs = jv(np.arange(order + 1), x)

    def scaled(v: np.ndarray) -> np.ndarray:
        return (mat @ v - mid * v) / half

    t_prev, t_cur = vec, scaled(vec)
    out = coeffs[0] * t_prev + 2 * (-1j) * coeffs[1] * t_cur
    phase = -1j
    for k in range(2, order + 1):
        t_prev, t_cur = t_cur, 2 * scaled(t_cur) - t_prev
        phase *= -1j
        out = out + 2 * phase * coeffs[k] * t_cur
    return np.exp(-1j * mid * t) * out


def dynamics_faf(
    h: SpinHamiltonian,
    times: Sequence[float],
    ks: Sequence[int] = (1,),
    seed: int = 0,
    initial_index: int | None = None,
    tol: float = 1e-12,
) -> dict[str, np.ndarray]:
    """``F_k(t)`` after a quench from a random even computational basis state.

    Returns arrays ``t``, ``energy`` and ``faf_k`` for each ``k``.
    """
    if h.n_qubits > 16:
        raise EDBudgetError("Chebyshev dynamics limited to N <= 16")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("time grid must be non-negative and sorted")
    rng = np.random.default_rng(seed)
    idx = int(rng.integers(h.dim)) if initial_index is None else int(initial_index)
    vec = np.zeros(h.dim, dtype=complex)
    vec[idx] = 1.0
    bounds = _spectral_bounds(h.matrix)
    states, rank = h.basis, even_sector_basis(h.n_qubits)[1]
    out: dict[str, list[float]] = {"t": [], "energy": []}
    for k in ks:
        out[f"faf_{k}"] = []
    now = 0.0
    for t in times:
        vec = chebyshev_evolve(h.matrix, vec, t - now, tol=tol, bounds=bounds)
        now = t
        cov = _covariances(h.n_qubits, vec[:, None], states, rank)
        fafs = _faf_batch(cov, ks)
        out["t"].append(t)
        out["energy"].append(float(np.real(np.vdot(vec, h.matrix @ vec))))
        for k in ks:
            out[f"faf_{k}"].append(float(fafs[k][0]))
    return {key: np.array(val) for key, val in out.items()}


@dataclass(frozen=True)
class SaturationResult:
    """Saturation time (``None`` if censored), power-law exponent and late-time value.

    ``gamma`` and ``gamma_se`` are NaN when fewer than three points fall in the fit range.
    """

    t_sat: float | None
    gamma: float
    gamma_se: float
    f_inf: float


def saturation_analysis(
    t: Sequence[float],
    series: Sequence[float],
    eps: float,
    window: tuple[float, float] = (1000.0, 2000.0),
    fit_range: tuple[float, float] | None = None,
) -> SaturationResult:
    """Late-time value, first time with ``F_inf - F(t) < eps`` and log-log decay exponent.

    The crossing is searched before ``window[0]`` only, since inside the averaging window
    some sample always sits at or above the mean; ``t_sat`` is ``None`` (censored) when
    the series has not come within ``eps`` by then. ``F_inf`` averages the series over ``window``; ``gamma`` fits ``F_inf - F(t) ~ t^-gamma``
    over ``fit_range``. The default range starts once the gap is below a quarter of ``F_inf``
    and stops once it falls under ``max(0.02 F_inf, 3 sigma)``, where ``sigma`` is the
    temporal spread inside the window, so late-time noise does not enter the fit.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(series, dtype=float)
    in_window = (t >= window[0]) & (t <= window[1])
    if not np.any(in_window):
        raise ValueError(f"no samples inside the late-time window {window}")
    f_inf = float(np.mean(y[in_window]))
    noise = float(np.std(y[in_window]))
    gap = f_inf - y
    below = np.flatnonzero((gap < eps) & (t < window[0]))
    t_sat = float(t[below[0]]) if below.size else None
    if fit_range is None:
        positive = t > 0
        entered = np.flatnonzero(positive & (gap < 0.25 * f_inf))
        start = float(t[entered[0]]) if entered.size else float(t[positive][0])
        floor = max(0.02 * f_inf, 3.0 * noise)
        settled = np.flatnonzero((t > start) & (gap < floor))
        stop = float(t[settled[0]]) if settled.size else float(window[0])
        fit_range = (start, stop)
    mask = (t >= fit_range[0]) & (t <= fit_range[1]) & (gap > 0) & (t > 0)
    if np.count_nonzero(mask) < 3:
        # Short or already-saturated series: the crossing time is still meaningful.
        return SaturationResult(t_sat, math.nan, math.nan, f_inf)
    (slope, _), cov = np.polyfit(np.log(t[mask]), np.log(gap[mask]), 1, cov=True)
    return SaturationResult(t_sat, float(-slope), float(math.sqrt(cov[0, 0])), f_inf)


def linear_growth_fit(t: Sequence[float], series: Sequence[float], f_inf: float, band: tuple[float, float] = (0.05, 0.4)) -> tuple[float, float]:
    """Slope and ``R^2`` of a straight-line fit over the early growth window.

    The window runs from the first time the series exceeds ``band[0] * f_inf`` to the
    first time it exceeds ``band[1] * f_inf``, skipping the quadratic onset at ``t = 0``
    and stopping before the crossover to saturation.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(series, dtype=float)
    lo = np.flatnonzero(y >= band[0] * f_inf)
    hi = np.flatnonzero(y >= band[1] * f_inf)
    if lo.size == 0 or hi.size == 0:
        raise ValueError("series never leaves the early-time band")
    mask = (t >= t[lo[0]]) & (t <= t[hi[0]])
    if np.count_nonzero(mask) < 3:
        raise ValueError("too few points in the early-time window")
    slope, intercept = np.polyfit(t[mask], y[mask], 1)
    resid = y[mask] - (slope * t[mask] + intercept)
    total = np.sum((y[mask] - y[mask].mean()) ** 2)
    return float(slope), float(1.0 - np.sum(resid**2) / total)
