import math

import numpy as np
import pytest
import scipy.linalg

from fafkit.dense_state import StateVector, covariance_matrix, prepare_named, product_state
from fafkit.ed_lab import (
    EDBudgetError,
    binder_cumulant,
    build_hamiltonian,
    chebyshev_evolve,
    dk_fk_extract,
    dynamics_faf,
    even_sector_basis,
    extrapolate_crossings,
    faf_derivative,
    full_spectrum_scan,
    ground_energy_and_state,
    ground_state,
    linear_growth_fit,
    mid_spectrum_mean,
    perturbative_ground_state,
    saturation_analysis,
)
from fafkit.free_fermion import canonical_form, tfim_hamiltonian
from fafkit.nongauss import faf

from conftest import PAULI_X, PAULI_Z, kron_all, site_operator


def _xx(a: int, b: int, n: int) -> np.ndarray:
    return site_operator(PAULI_X, a, n) @ site_operator(PAULI_X, b, n)


def _kron_model(model: str, n: int, h_z: float, lam: float, periodic: bool, l0: int) -> np.ndarray:
    h = sum(-h_z * site_operator(PAULI_Z, m, n) for m in range(1, n + 1))
    h = h - sum(_xx(m, m + 1, n) for m in range(1, n))
    if periodic:
        h = h - _xx(1, n, n)
    if model == "impurity":
        h = h + lam * _xx(l0, l0 + 2, n)
    if model == "annni":
        h = h + lam * sum(_xx(m, m + 2, n) for m in range(1, n - 1))
        if periodic:
            h = h + lam * (_xx(1, n - 1, n) + _xx(2, n, n))
    return h


def _free_even_levels(n: int, h_z: float, bc: str) -> np.ndarray:
    g, eps = canonical_form(tfim_hamiltonian(n, h_z, bc))
    vacuum_parity = round(np.linalg.det(g))
    levels = []
    for mask in range(1 << n):
        occupied = [eps[j] for j in range(n) if mask >> j & 1]
        if vacuum_parity * (-1) ** len(occupied) == 1:
            levels.append(-0.5 * eps.sum() + sum(occupied))
    return np.sort(levels)


def test_even_sector_basis_is_sorted_and_complete():
    states, rank = even_sector_basis(4)
    assert states.tolist() == [0, 3, 5, 6, 9, 10, 12, 15]
    assert all(rank[s] == i for i, s in enumerate(states))


@pytest.mark.parametrize("model", ["tfim", "impurity", "annni"])
@pytest.mark.parametrize("bc", ["open", "periodic"])
def test_sector_matrix_matches_kron_oracle(model, bc):
    n, h_z, lam = 6, 0.9, 0.35
    h = build_hamiltonian(model, n, h_z, lam, bc, l0=2 if model == "impurity" else None)
    oracle = _kron_model(model, n, h_z, lam, bc == "periodic", l0=2)
    states, _ = even_sector_basis(n)
    np.testing.assert_allclose(h.matrix.toarray(), oracle[np.ix_(states, states)], atol=1e-12)


@pytest.mark.parametrize(("bc", "h_z"), [("open", 0.7), ("open", 1.4), ("periodic", 0.6)])
def test_free_chain_levels_match_bogoliubov_energies(bc, h_z):
    n = 6
    vals = np.linalg.eigvalsh(build_hamiltonian("tfim", n, h_z, bc=bc).matrix.toarray())
    np.testing.assert_allclose(vals, _free_even_levels(n, h_z, bc), atol=1e-10)


def test_free_chain_eigenstates_are_gaussian():
    records = full_spectrum_scan(build_hamiltonian("tfim", 8, 0.7), ks=(1, 2))
    assert len(records) == 128
    assert max(max(r.faf) for r in records) < 1e-9
    energies = [r.energy for r in records]
    assert energies == sorted(energies)
    assert all(r.parity == pytest.approx(1.0) for r in records)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"model": "xyz", "n_qubits": 4, "h_z": 1.0},
        {"model": "tfim", "n_qubits": 4, "h_z": 1.0, "bc": "twisted"},
        {"model": "annni", "n_qubits": 3, "h_z": 1.0},
        {"model": "impurity", "n_qubits": 6, "h_z": 1.0, "l0": 5},
    ],
)
def test_build_hamiltonian_validation(kwargs):
    with pytest.raises(ValueError):
        build_hamiltonian(**kwargs)


def test_odd_sector_is_not_supported():
    with pytest.raises(NotImplementedError):
        build_hamiltonian("tfim", 4, 1.0, sector="odd")


def test_budget_errors():
    with pytest.raises(EDBudgetError):
        build_hamiltonian("tfim", 30, 1.0)
    with pytest.raises(EDBudgetError):
        full_spectrum_scan(build_hamiltonian("tfim", 6, 1.0), max_qubits=5)


def test_ground_state_is_normalized_eigenvector():
    h = build_hamiltonian("annni", 10, 0.8, 0.4, "periodic")
    energy, vec = ground_energy_and_state(h)
    assert np.linalg.norm(h.matrix @ vec - energy * vec) < 1e-8
    psi = ground_state(h)
    assert h.energy(psi) == pytest.approx(energy)


def test_binder_cumulant_limits():
    n = 6
    ghz = np.zeros(1 << n, dtype=complex)
    ghz[0] = ghz[-1] = 1
    # Hadamards turn the Z-basis cat into (|+..+> + |-..->), fully ordered along X.
    hadamard = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    cat_x = StateVector.from_amplitudes(kron_all([hadamard] * n) @ ghz)
    assert binder_cumulant(cat_x) == pytest.approx(2 / 3)
    vacuum = prepare_named("vacuum", n_qubits=n)
    assert binder_cumulant(vacuum) == pytest.approx(2 / (3 * n))


def test_binder_cumulant_tracks_the_ordered_phase():
    deep = binder_cumulant(ground_state(build_hamiltonian("tfim", 8, 0.2)))
    para = binder_cumulant(ground_state(build_hamiltonian("tfim", 8, 3.0)))
    assert deep > 0.6 > 0.2 > para


def test_extrapolate_crossings_recovers_intercept():
    sizes = np.array([9.0, 11.0, 13.0])
    h_c, a = extrapolate_crossings(sizes, 0.44 + 3.0 / sizes**2)
    assert (h_c, a) == pytest.approx((0.44, 3.0))
    with pytest.raises(ValueError):
        extrapolate_crossings([8.0], [0.5])


def test_dk_fk_of_free_chain_vanishes():
    d, f = dk_fk_extract({"model": "tfim", "bc": "open"}, 1, (8, 9), h_z=0.8)
    assert abs(d) < 1e-9 and abs(f) < 1e-8


def test_dk_fk_of_block_product_family():
    block = faf(covariance_matrix(prepare_named("psi_theta", theta=0.9)), 1)

    def family(n: int) -> StateVector:
        return prepare_named("psi_theta_product", theta=0.9, n_qubits=n)

    d, f = dk_fk_extract(family, 1, (8, 12), strict=False)
    assert d == pytest.approx(block / 4)
    assert f == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError):
        dk_fk_extract(family, 1, (8, 12))


def test_dk_fk_of_plus_product_is_constant():
    plus = np.array([1, 1]) / math.sqrt(2)
    d, f = dk_fk_extract(lambda n: product_state(plus, n), 1, (4, 7), strict=False)
    assert d == pytest.approx(0.0, abs=1e-12)
    assert f == pytest.approx(1.0)


def test_faf_derivative_is_converged():
    model = {"model": "impurity", "lam": 0.3, "bc": "open"}
    coarse = faf_derivative(model, 1, 0.8, 8, dh=1e-3)
    fine = faf_derivative(model, 1, 0.8, 8, dh=5e-4)
    assert fine == pytest.approx(coarse, rel=1e-2)


@pytest.mark.parametrize("lam", [0.01, 0.03])
def test_perturbative_ground_state_matches_ed(lam):
    pert = perturbative_ground_state(8, 1.5, lam)
    exact = ground_state(build_hamiltonian("impurity", 8, 1.5, lam))
    assert abs(np.vdot(pert.amplitudes, exact.amplitudes)) ** 2 > 1 - 1e-10
    f_pert = faf(covariance_matrix(pert), 1)
    f_exact = faf(covariance_matrix(exact), 1)
    assert f_pert == pytest.approx(f_exact, rel=1e-3)


def test_impurity_faf_scales_quadratically():
    values = [faf(covariance_matrix(ground_state(build_hamiltonian("impurity", 8, 1.5, lam))), 1) for lam in (0.01, 0.02)]
    assert math.log2(values[1] / values[0]) == pytest.approx(2.0, abs=0.02)


def test_chebyshev_matches_matrix_exponential(rng):
    h = build_hamiltonian("annni", 8, 0.9, 0.5)
    vec = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
    vec /= np.linalg.norm(vec)
    expected = scipy.linalg.expm(-1j * 10.0 * h.matrix.toarray()) @ vec
    np.testing.assert_allclose(chebyshev_evolve(h, vec, 10.0), expected, atol=1e-8)


def test_chebyshev_at_zero_time_is_identity(rng):
    h = build_hamiltonian("tfim", 6, 1.0)
    vec = rng.standard_normal(h.dim).astype(complex)
    np.testing.assert_array_equal(chebyshev_evolve(h, vec, 0.0), vec)


def test_chebyshev_eigenstate_acquires_phase():
    h = build_hamiltonian("impurity", 8, 1.2, 0.6, "periodic")
    energy, vec = ground_energy_and_state(h)
    np.testing.assert_allclose(chebyshev_evolve(h, vec, 3.7), np.exp(-3.7j * energy) * vec, atol=1e-9)


def test_dynamics_starts_gaussian_and_conserves_energy():
    h = build_hamiltonian("impurity", 8, 1.0, 1.0)
    out = dynamics_faf(h, [0.0, 0.5, 2.0, 10.0], ks=(1, 2), seed=3)
    assert set(out) == {"t", "energy", "faf_1", "faf_2"}
    assert out["faf_1"][0] == pytest.approx(0.0, abs=1e-12)
    assert out["faf_1"][-1] > 0.1
    assert np.ptp(out["energy"]) < 1e-9


def test_dynamics_validates_time_grid():
    h = build_hamiltonian("tfim", 4, 1.0)
    with pytest.raises(ValueError):
        dynamics_faf(h, [1.0, 0.5])


def test_mid_spectrum_mean_uses_states_closest_to_zero():
    records = full_spectrum_scan(build_hamiltonian("annni", 8, 0.8, 0.5), ks=(1,))
    energies = np.array([r.energy for r in records])
    closest = np.argsort(np.abs(energies))[:12]
    expected = np.mean([records[i].faf[0] for i in closest])
    assert mid_spectrum_mean(records, 8) == pytest.approx(expected)


def _synthetic_series(gamma: float):
    t = np.concatenate([np.linspace(0.0, 10.0, 41), np.arange(11.0, 100.0), np.geomspace(100.0, 2000.0, 80)])
    f_inf = 4.0
    gap = np.minimum(f_inf, 10.0 * np.maximum(t, 1e-9) ** -gamma)
    return t, f_inf - gap, f_inf


def test_saturation_recovers_power_law_exponent():
    t, series, f_inf = _synthetic_series(1.9)
    result = saturation_analysis(t, series, eps=0.1)
    assert result.gamma == pytest.approx(1.9, abs=0.05)
    assert result.f_inf == pytest.approx(f_inf, abs=1e-3)
    assert result.t_sat == pytest.approx(t[np.flatnonzero(f_inf - series < 0.1)[0]], rel=0.05)


def test_saturation_is_censored_when_gap_never_closes():
    t, series, _ = _synthetic_series(0.5)
    # The gap to the window mean is still about 0.05 just before the window opens.
    assert saturation_analysis(t, series, eps=0.02).t_sat is None
    assert saturation_analysis(t, series, eps=0.5).t_sat is not None


def test_saturation_needs_samples_in_window():
    with pytest.raises(ValueError):
        saturation_analysis([1.0, 2.0, 3.0], [0.1, 0.2, 0.3], eps=0.1)


def test_linear_growth_fit_on_exact_ramp():
    t = np.linspace(0.0, 20.0, 81)
    series = np.minimum(0.5 * t, 5.0)
    slope, r2 = linear_growth_fit(t, series, f_inf=5.0)
    assert slope == pytest.approx(0.5)
    assert r2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        linear_growth_fit(t, series, f_inf=50.0)


def test_saturation_without_fit_points_reports_nan_exponent():
    t = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    series = np.array([0.0, 2.0, 2.0, 2.0, 2.0])
    result = saturation_analysis(t, series, eps=0.1, window=(3.0, 4.0))
    assert result.t_sat == 1.0 and math.isnan(result.gamma)
