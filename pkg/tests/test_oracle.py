import numpy as np
import pytest

from harmonic_vsc import oracle
from harmonic_vsc.co2 import CO2Preset
from harmonic_vsc.model import EnsembleConfig, SystemState
from harmonic_vsc.polarizability import perturbative_polarizability
from harmonic_vsc.verification import property_sweep

from conftest import random_state


def test_uncoupled_blocks_decouple(co2):
    model = oracle.build_quadratic(co2.ensemble(3, 0.0))
    K = model.stiffness
    ph = model.photon
    assert np.all(K[ph, :ph] == 0.0)
    assert K[ph, ph] == pytest.approx(co2.ensemble(3, 0.0).omega_beta ** 2)
    # electrons of different molecules never couple without the cavity
    kee = K[model.electrons, model.electrons]
    assert np.count_nonzero(kee - np.diag(np.diag(kee))) == 0


def test_single_molecule_photon_electron_entry():
    cfg = EnsembleConfig(n_molecules=1, nuclear_masses=(1.0,), nuclear_charges=(1.0,), electron_charge=2.0,
                         k_e=1.0, lam=0.3, omega_beta=0.7)
    K = oracle.build_quadratic(cfg).stiffness
    assert K[0, -1] == pytest.approx(0.3 * 2.0 * 0.7)
    assert K[0, 0] == pytest.approx(1.0 + (0.3 * 2.0) ** 2)


def test_oracle_refuses_large_ensembles(co2):
    with pytest.raises(ValueError, match="limited"):
        oracle.build_quadratic(co2.ensemble(oracle.MAX_MOLECULES + 1, 0.01))


def test_uncoupled_minimum_is_nuclear_centroid(co2, rng):
    cfg = co2.ensemble(4, 0.0)
    state = random_state(cfg, rng)
    mini = oracle.electronic_minimize(oracle.build_quadratic(cfg), state.positions, state.q_beta)
    np.testing.assert_allclose(mini.r, state.positions.mean(axis=1), rtol=1e-13)


def test_zero_point_conventions_agree_for_one_molecule(co2):
    model = oracle.build_quadratic(co2.ensemble(1, 0.2))
    a = oracle.electronic_minimize(model, np.zeros((1, 3)), 0.0, "hartree")
    b = oracle.electronic_minimize(model, np.zeros((1, 3)), 0.0, "exact")
    assert a.zero_point == pytest.approx(b.zero_point, rel=1e-14)
    with pytest.raises(ValueError):
        oracle.electronic_minimize(model, np.zeros((1, 3)), 0.0, "other")


def test_bo_forces_match_finite_differences(generic_config, rng):
    model = oracle.build_quadratic(generic_config)
    state = random_state(generic_config, rng)
    fa, qa = oracle.born_oppenheimer_forces(model, state.positions, state.q_beta)
    fb, qb = oracle.finite_difference_forces(model, state.positions, state.q_beta)
    np.testing.assert_allclose(fa, fb, rtol=1e-6, atol=1e-8)
    assert qa == pytest.approx(qb, rel=1e-6)


def test_d_level_indefinite_beyond_onset():
    cfg = CO2Preset().ensemble(2, 0.5, level="D")
    spec = oracle.full_normal_modes(oracle.build_quadratic(cfg), clamp_nuclei=True)
    assert spec.unstable
    assert np.all(np.isfinite(spec.frequencies))


def test_photon_frequency_clamped_nuclei_neutral_atom():
    cfg = EnsembleConfig(n_molecules=1, nuclear_masses=(1.0,), nuclear_charges=(1.0,), electron_charge=1.0,
                         k_e=1.0, lam=0.5, omega_beta=1.0, nuclear_potential="none")
    spec = oracle.full_normal_modes(oracle.build_quadratic(cfg), clamp_nuclei=True)
    assert spec.frequencies[-1] == pytest.approx(np.sqrt(cfg.gamma2), rel=1e-12)


def test_adiabatic_limit_of_full_diagonalization(co2):
    # with light electrons the slow part of the full spectrum approaches the Schur complement
    cfg = co2.ensemble(3, 0.01)
    adiabatic = np.sort(oracle.full_normal_modes(oracle.build_quadratic(cfg)).frequencies)
    gaps = []
    for m_e in (1e3, 1e2, 10.0, 1.0):
        full = oracle.full_normal_modes(oracle.build_quadratic(cfg, electron_mass=m_e), eliminate_electrons=False)
        slow = np.sort(full.frequencies)[:len(adiabatic)]
        gaps.append(np.max(np.abs(slow - adiabatic) / np.maximum(adiabatic, 1e-3)))
    # non-adiabatic correction is linear in the electron/nuclear mass ratio
    ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
    np.testing.assert_allclose(ratios, 10.0, rtol=0.05)
    assert gaps[-1] < 1e-6


def test_sum_over_states_single_molecule_exact():
    cfg = EnsembleConfig(n_molecules=1, nuclear_masses=(1.0,), nuclear_charges=(1.0,), electron_charge=1.5,
                         k_e=0.8, lam=0.4, omega_beta=1.0)
    expected = 1.5**2 / (0.8 + (0.4 * 1.5) ** 2)
    assert oracle.sum_over_states_polarizability(cfg) == pytest.approx(expected, rel=1e-10)


def test_sum_over_states_in_ensemble_is_perturbative(co2):
    cfg = co2.ensemble(5, 0.1)
    assert oracle.sum_over_states_polarizability(cfg) == pytest.approx(
        perturbative_polarizability("local", cfg).value, rel=1e-10)


def test_static_response_methods_agree(generic_config):
    lin = oracle.static_response(generic_config, "local", "local", 0, 1)
    fd = oracle.static_response(generic_config, "local", "local", 0, 1, method="finite_difference")
    assert fd == pytest.approx(lin, rel=1e-8)
    with pytest.raises(ValueError):
        oracle.static_response(generic_config, "local", "local", method="other")


def test_rest_energy_is_zero(co2):
    cfg = co2.ensemble(2, 0.1)
    model = oracle.build_quadratic(cfg)
    assert oracle.born_oppenheimer_energy(model, SystemState.at_rest(cfg).positions, 0.0) == 0.0


def test_property_sweep_passes():
    result = property_sweep(n_draws=60, seed=7, tolerance=1e-8)
    assert result.passed, result.table()
