"""Acceptance battery: each criterion bundles numerical checks with explicit tolerances.

``level="full"`` runs every check at its stated scale.  ``level="fast"`` keeps the same
tolerances but shrinks sample counts and drops checks that only make sense at the
largest sizes; the omitted checks are listed in the result's ``notes``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .commutant import comm2_independent_count, invariance_check, phi_measure
from .dense_state import StateVector, apply_unitary, covariance_matrix, haar_state, prepare_named
from .ed_lab import (
    binder_crossing,
    build_hamiltonian,
    dynamics_faf,
    extrapolate_crossings,
    full_spectrum_scan,
    ground_state,
    linear_growth_fit,
    mid_spectrum_mean,
    saturation_analysis,
)
from .free_fermion import apply_matchgate_circuit, pe_covariance, random_matchgate_circuit
from .nongauss import (
    catalan,
    faf,
    nge_finite_q,
    nge_infinity,
    random_covariance,
    semicircle_cdf,
    typical_faf,
    williamson_eigenvalues,
)
from .stabilizer_mc import (
    CircuitBuilder,
    StabilizerTableau,
    apply_clifford,
    clifford_group,
    covariance_from_tableau,
    delta_faf1,
    faf1_of_circuit,
    fit_decay,
    fit_log_scaling,
    mc_faf1,
    mc_faf1_curve,
    rmps_faf1,
    t_sat,
)

__all__ = ["Check", "CriterionResult", "CRITERIA", "run_criteria", "dynamics_time_grid"]

LEVELS = ("fast", "full")


@dataclass(frozen=True)
class Check:
    """One measured quantity compared against its target."""

    name: str
    measured: float
    expected: str
    passed: bool

    def describe(self) -> str:
        status = "ok" if self.passed else "VIOLATED"
        return f"{self.name}: measured {self.measured:.6g}, expected {self.expected} [{status}]"


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    level: str
    checks: tuple[Check, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.number}: {self.title}"

    def report(self) -> str:
        lines = [self.line()]
        lines.extend(f"    {c.describe()}" for c in self.checks)
        lines.extend(f"    note: {n}" for n in self.notes)
        return "\n".join(lines)


def _below(name: str, value: float, bound: float) -> Check:
    return Check(name, float(value), f"< {bound:g}", bool(value < bound))


def _above(name: str, value: float, bound: float) -> Check:
    return Check(name, float(value), f"> {bound:g}", bool(value > bound))


def _within(name: str, value: float, lo: float, hi: float) -> Check:
    return Check(name, float(value), f"in [{lo:g}, {hi:g}]", bool(lo <= value <= hi))


def _check_level(level: str) -> None:
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose from {LEVELS}")


# ---------------------------------------------------------------------------
# 1. Exact golden values
# ---------------------------------------------------------------------------


def criterion_1(level: str = "full") -> CriterionResult:
    _check_level(level)
    worst_psi = worst_prod = worst_t = 0.0
    for theta in (0.0, math.pi / 4, math.pi / 2, math.pi):
        cov = covariance_matrix(prepare_named("psi_theta", theta=theta))
        for k in (1, 2, 3):
            exact = 4 * (1 - math.cos(theta / 2) ** (2 * k))
            worst_psi = max(worst_psi, abs(faf(cov, k) - exact))
        for n in (8, 12):
            cov_n = covariance_matrix(prepare_named("psi_theta_product", theta=theta, n_qubits=n))
            for k in (1, 2, 3):
                exact = n * (1 - math.cos(theta / 2) ** (2 * k))
                worst_prod = max(worst_prod, abs(faf(cov_n, k) - exact))
    for theta, phi in ((math.pi / 4, 0.0), (math.acos(1 / math.sqrt(3)), math.pi / 4), (math.pi / 3, 1.0)):
        for n in (4, 8):
            cov = covariance_matrix(prepare_named("t_product", theta=theta, phi=phi, n_qubits=n))
            for k in (1, 2, 3):
                exact = 1 - math.cos(theta) ** (2 * k * n)
                worst_t = max(worst_t, abs(faf(cov, k) - exact))
    checks = (
        _below("four-qubit family, max error", worst_psi, 1e-10),
        _below("product family N=8,12, max error", worst_prod, 1e-10),
        _below("single-qubit product N=4,8, max error", worst_t, 1e-10),
    )
    return CriterionResult(1, "exact golden values", level, checks)


# ---------------------------------------------------------------------------
# 2. Gaussian invariance and faithfulness
# ---------------------------------------------------------------------------


def _computational_state(n: int, index: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def criterion_2(level: str = "full", seed: int = 20) -> CriterionResult:
    _check_level(level)
    n = 6
    n_states, n_circuits = (20, 200) if level == "full" else (4, 25)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        psi = haar_state(n, "generic", rng)
        base = [faf(covariance_matrix(psi), k) for k in (1, 2, 3)]
        for _ in range(n_circuits):
            circuit = random_matchgate_circuit(n, 3 * n, rng)
            cov = covariance_matrix(apply_matchgate_circuit(psi, circuit))
            worst = max(worst, max(abs(faf(cov, k) - b) for k, b in zip((1, 2, 3), base)))
    mismatches = 0
    trials = 0
    for _ in range(n_states):
        gaussian = apply_matchgate_circuit(_computational_state(n, int(rng.integers(1 << n))), random_matchgate_circuit(n, 4 * n, rng))
        for psi in (gaussian, haar_state(n, "generic", rng), haar_state(n, "even", rng)):
            cov = covariance_matrix(psi)
            zero_faf = all(abs(faf(cov, k)) < 1e-8 for k in (1, 2, 3))
            unit_spectrum = bool(np.all(np.abs(williamson_eigenvalues(cov) - 1) < 1e-8))
            mismatches += zero_faf != unit_spectrum
            trials += 1
    checks = (
        _below(f"max |dF_k| over {n_states} states x {n_circuits} circuits", worst, 1e-9),
        Check(f"F_k = 0 iff unit Williamson spectrum ({trials} states)", float(mismatches), "0 mismatches", mismatches == 0),
    )
    return CriterionResult(2, "Gaussian invariance and faithfulness", level, checks)


# ---------------------------------------------------------------------------
# 3. Typical states
# ---------------------------------------------------------------------------


def criterion_3(level: str = "full", seed: int = 30) -> CriterionResult:
    _check_level(level)
    samples, sizes = (500, (6, 8, 10)) if level == "full" else (150, (6, 8))
    checks = []
    for n in sizes:
        for sector in ("generic", "even"):
            rng = np.random.default_rng([seed, n, sector == "even"])
            values = np.array([[faf(covariance_matrix(haar_state(n, sector, rng)), k) for k in (1, 2)] for _ in range(samples)])
            for j, k in enumerate((1, 2)):
                mean = values[:, j].mean()
                se = values[:, j].std(ddof=1) / math.sqrt(samples)
                z = abs(mean - typical_faf(n, k, sector)) / se
                checks.append(_below(f"N={n} {sector} k={k}: |mean - closed form| / SE", z, 3.0))
    rng = np.random.default_rng([seed, 3])
    worst = max(abs(faf(covariance_matrix(haar_state(3, "even", rng)), 1)) for _ in range(50))
    checks.append(_below("even sector N=3: max F_1", worst, 1e-10))
    return CriterionResult(3, "Haar-typical antiflatness", level, tuple(checks))


# ---------------------------------------------------------------------------
# 4. Random-matrix model
# ---------------------------------------------------------------------------


def criterion_4(level: str = "full", seed: int = 40) -> CriterionResult:
    _check_level(level)
    n, samples = (256, 20) if level == "full" else (96, 10)
    sigma2 = 1.0 / (4 * n)
    rng = np.random.default_rng(seed)
    moments = np.zeros(3)
    eigs = []
    for _ in range(samples):
        m = random_covariance(n, sigma2, rng)
        mtm = m.T @ m
        power = np.eye(2 * n)
        for k in range(3):
            power = power @ mtm
            moments[k] += 0.5 * np.trace(power) / samples
        eigs.append(np.linalg.eigvalsh(1j * m))
    checks = []
    for k in (1, 2, 3):
        target = catalan(k) * 2**k * n ** (k + 1) * sigma2**k
        checks.append(_below(f"k={k}: relative moment deviation", abs(moments[k - 1] / target - 1), 0.05))
    pooled = np.concatenate(eigs)
    ks = stats.kstest(pooled, lambda x: semicircle_cdf(x, n, sigma2))
    checks.append(_above("semicircle KS p-value", ks.pvalue, 0.01))
    return CriterionResult(4, "random-matrix moments and semicircle", level, tuple(checks))


# ---------------------------------------------------------------------------
# 5. Commutant
# ---------------------------------------------------------------------------


def criterion_5(level: str = "full") -> CriterionResult:
    _check_level(level)
    trials = 10 if level == "full" else 3
    checks = []
    for spec in ((1, 1), (1, 1, 1, 1), (2, 2)):
        for n in (3, 4):
            worst = max(invariance_check(spec, n, trials=trials, seed=50 + n, generator=g) for g in ("circuit", "rotation", "reflection"))
            checks.append(_below(f"spec {spec} N={n}: max invariance violation", worst, 1e-8))
    psi4 = prepare_named("psi_theta", theta=math.pi / 2).amplitudes
    vac2 = np.zeros(4, dtype=complex)
    vac2[0] = 1.0
    psi = StateVector.from_amplitudes(np.kron(psi4, vac2))
    checks.append(_below("|phi_(2,2)| on the padded four-qubit state", abs(phi_measure(psi, (2, 2))), 1e-9))
    checks.append(_above("F_1 of the same state", faf(covariance_matrix(psi), 1), 0.1))
    count = comm2_independent_count(2)
    checks.append(Check("independent two-replica elements at N=2", count, "= 2N+1 = 5", count == 5))
    return CriterionResult(5, "commutant invariants", level, tuple(checks))


# ---------------------------------------------------------------------------
# 6. Stabilizer engine
# ---------------------------------------------------------------------------


def _dense_oracle_mismatch(circuits: int, seed: int) -> tuple[float, float]:
    group = clifford_group()
    rng = np.random.default_rng(seed)
    worst_cov = worst_faf = 0.0
    for _ in range(circuits):
        n = int(rng.integers(2, 7))
        builder = CircuitBuilder(n, depth=int(rng.integers(1, 7)))
        pairs, gates = builder.sample(rng)
        tab = StabilizerTableau.vacuum(n)
        psi = _computational_state(n, 0)
        for (i, j), g in zip(pairs, gates):
            tab = apply_clifford(tab, group[g], (i, j))
            psi = apply_unitary(psi, group[g].to_unitary(), (i, j))
        dense = covariance_matrix(psi)
        worst_cov = max(worst_cov, float(np.abs(covariance_from_tableau(tab) - dense).max()))
        worst_faf = max(worst_faf, abs(faf1_of_circuit(n, pairs, gates, False) - faf(dense, 1)))
    return worst_cov, worst_faf


def criterion_6(level: str = "full", seed: int = 60) -> CriterionResult:
    _check_level(level)
    full = level == "full"
    checks = []
    notes = []
    worst_cov, worst_faf = _dense_oracle_mismatch(100 if full else 20, seed)
    checks.append(_below("tableau vs dense covariance, max deviation", worst_cov, 1e-10))
    checks.append(_below("packed kernel vs dense F_1, max deviation", worst_faf, 1e-10))
    z2_mean, _ = mc_faf1(CircuitBuilder(32, depth=1, symmetry="z2"), 200, seed)
    checks.append(_below("z2 brickwall depth 1: mean F_1", abs(z2_mean), 1e-12))
    if full:
        mean, _ = mc_faf1(CircuitBuilder(128, depth=30), 300, seed)
        checks.append(_below("N=128 depth 30: |mean F_1 - F_1^typ|", abs(delta_faf1(128, mean)), 0.1))
        curve, _ = mc_faf1_curve(CircuitBuilder(256, depth=14), 400, seed)
        delta = np.array([delta_faf1(256, v) for v in curve])
        fit = fit_decay(np.arange(4, 13), delta[4:13])
        checks.append(_within("alpha_1 from the N=256 decay (layers 4..12)", fit.alpha, 0.35, 0.55))
        sizes = (64, 128, 256, 512, 1024)
        sats = []
        for n in sizes:
            curve, _ = mc_faf1_curve(CircuitBuilder(n, depth=24), 200, seed)
            sats.append(t_sat(np.arange(25), [delta_faf1(n, v) for v in curve], eps=1.0))
        _, _, corr = fit_log_scaling(sizes, sats)
        checks.append(_above("t_sat(eps=1) vs log N correlation over N=64..1024", corr, 0.98))
    else:
        notes.append("fast level skips the N>=128 depth-30, decay-rate and t_sat checks")
    return CriterionResult(6, "stabilizer engine", level, tuple(checks), tuple(notes))


# ---------------------------------------------------------------------------
# 7. Random matrix product states
# ---------------------------------------------------------------------------


def rmps_beta(n_qubits: int, rs: Sequence[int], samples: int, seed: int = 70) -> tuple[float, np.ndarray]:
    """Exponent ``beta`` of ``dF_1 / N ~ chi^-beta`` with ``chi = 2^r``, and the per-site gaps."""
    gaps = []
    for r in rs:
        mean, _ = rmps_faf1(n_qubits, r, samples, seed=seed)
        gaps.append(delta_faf1(n_qubits, mean) / n_qubits)
    gaps = np.array(gaps)
    slope, _ = np.polyfit(np.log(2.0 ** np.asarray(rs)), np.log(gaps), 1)
    return float(-slope), gaps


def criterion_7(level: str = "full") -> CriterionResult:
    _check_level(level)
    if level == "full":
        beta, _ = rmps_beta(256, range(2, 8), 1000)
        label = "beta from N=256, r=2..7"
    else:
        beta, _ = rmps_beta(256, range(2, 6), 150)
        label = "beta from N=256, r=2..5"
    return CriterionResult(7, "RMPS bond-dimension scaling", level, (_within(label, beta, 1.7, 2.3),))


# ---------------------------------------------------------------------------
# 8. Equilibrium
# ---------------------------------------------------------------------------


def criterion_8(level: str = "full") -> CriterionResult:
    _check_level(level)
    full = level == "full"
    checks = []
    notes = []
    n_free = 10 if full else 8
    records = full_spectrum_scan(build_hamiltonian("tfim", n_free, 0.7, bc="open"), ks=(1, 2))
    worst = max(max(abs(v) for v in r.faf) for r in records)
    checks.append(_below(f"lambda=0 (N={n_free}, all {len(records)} even eigenstates): max F_k", worst, 1e-8))

    lams = np.geomspace(0.01, 0.1, 6)
    n_imp = 10 if full else 8
    values = [faf(covariance_matrix(ground_state(build_hamiltonian("impurity", n_imp, 2.0, lam=lam))), 1) for lam in lams]
    slope, _ = np.polyfit(np.log(lams), np.log(values), 1)
    checks.append(_within(f"impurity N={n_imp}: log-log slope of F_1 in lambda", slope, 1.9, 2.1))

    if full:
        model = {"model": "annni", "lam": 0.3, "bc": "periodic"}
        pairs = ((8, 10), (10, 12))
        crossings = [binder_crossing(model, p, (0.3, 0.6)) for p in pairs]
        h_c, _ = extrapolate_crossings([sum(p) / 2 for p in pairs], crossings)
        checks.append(_within("Binder crossing extrapolated to N -> infinity", h_c, 0.42, 0.46))
    else:
        notes.append("fast level skips the Binder crossing")

    worst_pe = worst_cov = 0.0
    obc = []
    for n in (8, 10, 12):
        h_pe, closed = pe_covariance(n, 0.3)
        cov = covariance_matrix(ground_state(build_hamiltonian("annni", n, h_pe, lam=0.3, bc="periodic")))
        worst_pe = max(worst_pe, abs(faf(cov, 1)))
        worst_cov = max(worst_cov, float(np.abs(cov - closed).max()))
        obc.append(faf(covariance_matrix(ground_state(build_hamiltonian("annni", n, h_pe, lam=0.3, bc="open"))), 1))
    checks.append(_below("Peschel-Emery PBC N=8,10,12: max F_1", worst_pe, 1e-8))
    checks.append(_below("Peschel-Emery OBC: spread of F_1 over N=8,10,12", max(obc) - min(obc), 0.05))
    checks.append(_below("Peschel-Emery covariance vs closed form", worst_cov, 1e-6))
    return CriterionResult(8, "equilibrium ground states", level, tuple(checks), tuple(notes))


# ---------------------------------------------------------------------------
# 9. Eigenstates and dynamics
# ---------------------------------------------------------------------------


def dynamics_time_grid(t_max: float = 2000.0) -> np.ndarray:
    """Dense early grid, unit steps to ``t=100``, then log-spaced points up to ``t_max``."""
    early = np.linspace(0.0, 10.0, 41)
    middle = np.arange(11.0, 100.0)
    late = np.geomspace(100.0, t_max, 80)
    return np.concatenate([early, middle, late])


def criterion_9(level: str = "full", seed: int = 3) -> CriterionResult:
    _check_level(level)
    full = level == "full"
    checks = []
    notes = []
    n_eig = 12 if full else 10
    records = full_spectrum_scan(build_hamiltonian("annni", n_eig, 1.0, lam=1.0, bc="open"), ks=(1,))
    mid = mid_spectrum_mean(records, n_eig)
    typ = typical_faf(n_eig, 1, "even")
    checks.append(_below(f"ANNNI N={n_eig}: |mid-spectrum mean F_1 - F_1^typ|", abs(mid - typ), 0.5))
    faf_sorted = np.array([r.faf[0] for r in records])
    tenth = max(len(records) // 10, 1)
    center = len(records) // 2
    edge = max(faf_sorted[:tenth].mean(), faf_sorted[-tenth:].mean())
    middle = faf_sorted[center - tenth // 2 : center + tenth // 2].mean()
    checks.append(_below("edge-decile mean F_1 minus central-decile mean F_1", edge - middle, 0.0))

    sizes = (10, 12, 14) if full else (8, 10)
    grid = dynamics_time_grid()
    sats = []
    for n in sizes:
        out = dynamics_faf(build_hamiltonian("impurity", n, 1.0, lam=1.0), grid, seed=seed)
        drift = float(np.abs(out["energy"] - out["energy"][0]).max())
        checks.append(_below(f"impurity N={n}: energy drift", drift, 1e-8))
        result = saturation_analysis(out["t"], out["faf_1"], eps=0.1)
        sats.append(np.inf if result.t_sat is None else result.t_sat)
        if full and n == sizes[-1]:
            _, r2 = linear_growth_fit(out["t"], out["faf_1"], result.f_inf)
            checks.append(_above(f"impurity N={n}: early-time linear R^2", r2, 0.98))
            checks.append(_within(f"impurity N={n}: decay exponent gamma", result.gamma, 1.6, 2.2))
    increasing = bool(np.all(np.diff(sats) > 0))
    checks.append(Check(f"t_sat increases over N={sizes}", float(sats[-1]), f"sequence {np.round(sats, 2).tolist()} increasing", increasing))
    n_ann = 14 if full else 10
    out = dynamics_faf(build_hamiltonian("annni", n_ann, 1.0, lam=1.0), np.linspace(0.0, 2.0, 9), seed=seed)
    checks.append(_above(f"ANNNI N={n_ann}: F_1(t=2) / N", out["faf_1"][-1] / n_ann, 0.5))
    if not full:
        notes.append("fast level runs the dynamics at N=8,10 and skips the growth and decay fits, which need N=14")
    return CriterionResult(9, "eigenstates and dynamics", level, tuple(checks), tuple(notes))


# ---------------------------------------------------------------------------
# 10. Non-Gaussian entropy
# ---------------------------------------------------------------------------


def criterion_10(level: str = "full", seed: int = 100) -> CriterionResult:
    _check_level(level)
    rng = np.random.default_rng(seed)
    checks = []
    worst_gauss = 0.0
    for _ in range(10):
        psi = apply_matchgate_circuit(_computational_state(6, 0), random_matchgate_circuit(6, 24, rng))
        worst_gauss = max(worst_gauss, abs(nge_infinity(covariance_matrix(psi))))
    checks.append(_below("Gaussian states: max |NGE_inf|", worst_gauss, 1e-8))

    worst_rel = 0.0
    for theta in (0.05, 0.1, 0.15):
        cov = covariance_matrix(prepare_named("psi_theta", theta=theta))
        if williamson_eigenvalues(cov).min() <= 0.99:
            raise RuntimeError("near-Gaussian probe state has a Williamson eigenvalue below 0.99")
        f1 = faf(cov, 1)
        worst_rel = max(worst_rel, abs(nge_infinity(cov) - f1 / 2) / f1)
    checks.append(_below("near-Gaussian: max |NGE_inf - F_1/2| / F_1", worst_rel, 0.01))

    worst_haar = 0.0
    for _ in range(5 if level == "full" else 2):
        cov = covariance_matrix(haar_state(10, "generic", rng))
        worst_haar = max(worst_haar, abs(nge_infinity(cov) - faf(cov, 1)))
    checks.append(_below("Haar N=10: max |NGE_inf - F_1|", worst_haar, 0.05))

    violations = 0
    for theta in np.linspace(0.0, math.pi, 9):
        psi = prepare_named("psi_theta", theta=float(theta))
        series = [nge_finite_q(psi, q) for q in range(1, 5)]
        violations += int(np.any(np.diff(series) < -1e-9))
    checks.append(Check("finite-q NGE non-decreasing in q (9 angles, q=1..4)", float(violations), "0 violations", violations == 0))
    return CriterionResult(10, "non-Gaussian entropy consistency", level, tuple(checks))


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_criteria(level: str = "fast", numbers: Sequence[int] | None = None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in numeric order."""
    _check_level(level)
    chosen = sorted(CRITERIA) if numbers is None else sorted(numbers)
    unknown = set(chosen) - set(CRITERIA)
    if unknown:
        raise ValueError(f"unknown criteria {sorted(unknown)}")
    return [CRITERIA[i](level) for i in chosen]
