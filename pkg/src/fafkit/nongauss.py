"""Non-Gaussianity measures computed from covariance matrices.

The fermionic antiflatness of a state with covariance matrix ``M`` is

    F_k = N - tr[(M^T M)^k] / 2 = N - sum_i lambda_i^(2k)

where ``lambda_i`` are the Williamson eigenvalues (the singular values of
``M``, which come in degenerate pairs).
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from .algebra import jordan_wigner
from .dense_state import StateVector, apply_pauli

__all__ = [
    "WilliamsonDiagnostic",
    "catalan",
    "check_covariance",
    "faf",
    "faf_from_correlators",
    "leading_typical_faf",
    "load_covariance_csv",
    "nge_finite_q",
    "nge_infinity",
    "random_covariance",
    "save_covariance_csv",
    "semicircle_cdf",
    "semicircle_density",
    "typical_faf",
    "vacuum_covariance",
    "williamson_eigenvalues",
]


class WilliamsonDiagnostic(ArithmeticError):
    """Singular values of a supposed covariance matrix do not pair up."""


def vacuum_covariance(n_qubits: int) -> np.ndarray:
    """``M_0``: direct sum of ``[[0, 1], [-1, 0]]`` blocks."""
    return np.kron(np.eye(n_qubits), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def check_covariance(m: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Validate shape and antisymmetry; return the matrix as float array."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"covariance matrix must be 2N x 2N, got shape {m.shape}")
    asym = np.max(np.abs(m + m.T), initial=0.0)
    if asym > atol:
        raise ValueError(f"covariance matrix is not antisymmetric (max |M + M^T| = {asym:.3e})")
    return m


def williamson_eigenvalues(m: np.ndarray, rtol: float = 1e-6) -> np.ndarray:
    """The ``N`` Williamson eigenvalues of ``M``, sorted in descending order.

    Raises:
        WilliamsonDiagnostic: when consecutive singular values fail to pair within ``rtol``.
    """
    m = check_covariance(m)
    s = np.linalg.svd(m, compute_uv=False)
    first, second = s[0::2], s[1::2]
    gap = np.abs(first - second)
    scale = np.maximum(np.maximum(first, second), 1e-12)
    bad = gap > rtol * scale + 1e-12
    if np.any(bad):
        i = int(np.argmax(bad))
        raise WilliamsonDiagnostic(f"singular values {first[i]!r} and {second[i]!r} do not pair")
    return 0.5 * (first + second)


def faf(m: np.ndarray, k: int = 1) -> float:
    """Fermionic antiflatness ``F_k = N - tr[(M^T M)^k] / 2``."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    m = check_covariance(m)
    n = m.shape[0] // 2
    s = np.linalg.svd(m, compute_uv=False)
    return float(n - 0.5 * np.sum(s ** (2 * k)))


def faf_from_correlators(correlators: Mapping[tuple[int, int], float], n_qubits: int) -> float:
    """``F_1`` from a sparse map ``(m, n) -> M_mn`` over 1-based pairs with ``m < n``.

    Entries with ``m > n`` are accepted and folded onto ``(n, m)`` with a sign flip.
    """
    total = 0.0
    seen: dict[tuple[int, int], float] = {}
    for (a, b), value in correlators.items():
        if a == b:
            raise ValueError(f"diagonal entry ({a}, {b}) is not a covariance element")
        if not (1 <= a <= 2 * n_qubits and 1 <= b <= 2 * n_qubits):
            raise IndexError(f"pair ({a}, {b}) out of range")
        key, val = ((a, b), value) if a < b else ((b, a), -value)
        if key in seen and abs(seen[key] - val) > 1e-12:
            raise ValueError(f"inconsistent entries for pair {key}")
        seen[key] = val
    for val in seen.values():
        total += val * val
    # tr(M^T M) counts each unordered pair twice.
    return float(n_qubits - total)


def nge_infinity(m: np.ndarray, atol: float = 1e-8) -> float:
    """Renyi-2 entropy of the Gaussian state sharing the covariance matrix ``M``."""
    lam = williamson_eigenvalues(m)
    if np.any(lam > 1.0 + atol):
        raise ValueError(f"Williamson eigenvalue {lam.max()!r} exceeds 1: not a physical covariance matrix")
    lam = np.clip(lam, 0.0, 1.0)
    purity = ((1 + lam) / 2) ** 2 + ((1 - lam) / 2) ** 2
    # Adding 0.0 turns the -0.0 of a Gaussian state into 0.0 in printed output.
    return float(-np.sum(np.log2(purity))) + 0.0


def _beam_splitter_factors(n_qubits: int) -> list:
    """Pauli strings ``gamma_j gamma_{2N+j}`` on two copies (2N qubits, one Jordan-Wigner string)."""
    n2 = 2 * n_qubits
    return [jordan_wigner(j, n2) * jordan_wigner(2 * n_qubits + j, n2) for j in range(1, 2 * n_qubits + 1)]


def _apply_beam_splitter(mat: np.ndarray, factors: list) -> np.ndarray:
    """``W @ mat`` where ``W = prod_j exp(pi/8 P_j) = prod_j (cos(pi/8) + sin(pi/8) P_j)``.

    Each ``P_j`` squares to ``-1`` and all of them commute, so the factors may be applied in any order.
    """
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    for op in factors:
        mat = c * mat + s * apply_pauli(mat, op)
    return mat


def _partial_trace_second(big: np.ndarray, dim: int) -> np.ndarray:
    return np.einsum("ajbj->ab", big.reshape(dim, dim, dim, dim))


def nge_finite_q(psi: StateVector, q: int, max_qubits: int = 6) -> float:
    """Renyi-2 non-Gaussian entropy after ``q`` fermionic self-convolutions.

    Dense and exponential in ``N``; limited to ``N <= max_qubits``. At ``N = 6`` each step
    past the first takes about 40 s and 1.6 GB.
    """
    if int(q) != q or q < 0:
        raise ValueError(f"q must be a non-negative integer, got {q}")
    if psi.n_qubits > max_qubits:
        raise MemoryError(f"nge_finite_q is limited to N <= {max_qubits}")
    dim = psi.dim
    if q == 0:
        return 0.0
    factors = _beam_splitter_factors(psi.n_qubits)
    # First step on the pure product state, as a vector.
    joint = _apply_beam_splitter(np.kron(psi.amplitudes, psi.amplitudes), factors).reshape(dim, dim)
    rho = joint @ joint.conj().T
    for _ in range(q - 1):
        big = _apply_beam_splitter(np.kron(rho, rho), factors)
        big = _apply_beam_splitter(big.conj().T, factors).conj().T
        rho = _partial_trace_second(big, dim)
    purity = float(np.real(np.einsum("ab,ba->", rho, rho)))
    return float(-np.log2(purity))


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def _typical_fraction(n: int, k: int, d: int) -> Fraction:
    if k == 1:
        return Fraction(n) - Fraction(n * (2 * n - 1), d + 1)
    num = n * (2 * n - 1) * (-8 * n * n + 4 * n * (d + 7) - d - 14)
    return Fraction(n) - Fraction(num, (d + 1) * (d + 2) * (d + 3))


def typical_faf(n_qubits: int, k: int = 1, sector: str = "generic") -> float:
    """Haar average of ``F_k`` for ``k`` in ``{1, 2}`` (exact rational arithmetic).

    ``sector="even"`` averages over the positive-parity subspace, of dimension ``2**(N-1)``.
    """
    if k not in (1, 2):
        raise NotImplementedError("closed forms exist for k=1,2 only; use leading_typical_faf")
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if sector in ("even", "even_parity"):
        # Every positive-parity state on three or fewer qubits is Gaussian.
        if n_qubits <= 3:
            return 0.0
        d = 1 << (n_qubits - 1)
    elif sector == "generic":
        if n_qubits == 1:
            return 0.0
        d = 1 << n_qubits
    else:
        raise ValueError(f"unknown sector {sector!r}")
    return float(_typical_fraction(n_qubits, k, d))


def leading_typical_faf(n_qubits: int, k: int, sector: str = "generic") -> float:
    """Large-``N`` form ``N - C_k 2^k N^(k+1) / d^k``."""
    if k < 1:
        raise ValueError("k must be positive")
    d = 1 << (n_qubits - 1 if sector in ("even", "even_parity") else n_qubits)
    value = Fraction(n_qubits) - Fraction(catalan(k) * 2**k * n_qubits ** (k + 1), d**k)
    return float(value)


def random_covariance(n_qubits: int, sigma2: float, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Antisymmetric Gaussian random matrix with independent entries of variance ``sigma2``."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    rng = np.random.default_rng(seed)
    n2 = 2 * n_qubits
    upper = np.triu(rng.standard_normal((n2, n2)) * math.sqrt(sigma2), 1)
    return upper - upper.T


def semicircle_density(x: np.ndarray, n_qubits: int, sigma2: float) -> np.ndarray:
    """Density of the eigenvalues ``x`` of ``M^T M``'s square roots (signed), radius ``sqrt(8 sigma2 N)``."""
    r2 = 8 * sigma2 * n_qubits
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = x * x < r2
    out[inside] = np.sqrt(r2 - x[inside] ** 2) / (4 * np.pi * sigma2 * n_qubits)
    return out


def semicircle_cdf(x: np.ndarray, n_qubits: int, sigma2: float) -> np.ndarray:
    """Cumulative distribution matching :func:`semicircle_density`."""
    radius = math.sqrt(8 * sigma2 * n_qubits)
    u = np.clip(np.asarray(x, dtype=float) / radius, -1.0, 1.0)
    return 0.5 + (u * np.sqrt(1 - u * u) + np.arcsin(u)) / np.pi


def save_covariance_csv(m: np.ndarray, path: str | Path | None = None) -> str:
    """Row-major CSV with ``2N`` columns; returns the text and writes it when ``path`` is given."""
    m = check_covariance(m)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in m:
        writer.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text)
        tmp.replace(path)
    return text


def load_covariance_csv(source: str | Path) -> np.ndarray:
    """Read a matrix written by :func:`save_covariance_csv` (path or CSV text)."""
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else str(source)
    rows = [[float(v) for v in row] for row in csv.reader(io.StringIO(text)) if row and not row[0].startswith("#")]
    return check_covariance(np.array(rows, dtype=float))
