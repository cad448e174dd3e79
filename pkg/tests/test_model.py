import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harmonic_vsc import oracle
from harmonic_vsc.co2 import CO2Preset
from harmonic_vsc.model import (
    ApproximationLevel,
    EnsembleConfig,
    NonNeutralMoleculeError,
    SystemState,
    electronic_energy,
    gamma_squared,
    screened_dipole,
    solve_dressed_electrons,
)

from conftest import random_state


def test_gamma_squared_uncoupled_is_one():
    assert gamma_squared(7, 0.0, 3.3) == 1.0


def test_gamma_squared_half_when_lambda2_alpha_is_one():
    assert gamma_squared(1, 0.5, 4.0) == pytest.approx(0.5, rel=1e-15)


def test_gamma_squared_co2_twenty_molecules():
    g2 = gamma_squared(20, 0.01, 25.0 / 3.0)
    assert g2 == pytest.approx(1.0 / (1.0 + 20 * 1e-4 * 25.0 / 3.0), rel=1e-15)
    # the same number from the oracle: photon frequency with nuclei clamped is gamma * omega
    cfg = CO2Preset().ensemble(20, 0.01)
    photon = oracle.full_normal_modes(oracle.build_quadratic(cfg), clamp_nuclei=True).frequencies[-1]
    assert (photon / cfg.omega_beta) ** 2 == pytest.approx(g2, rel=1e-12)


@given(n=st.integers(1, 10**6), lam=st.floats(0, 10), alpha=st.floats(1e-6, 1e3))
def test_gamma_squared_in_unit_interval(n, lam, alpha):
    g2 = gamma_squared(n, lam, alpha)
    assert 0 < g2 <= 1


def test_config_rejects_invalid_fields():
    base = dict(n_molecules=2, nuclear_masses=(1.0,), nuclear_charges=(1.0,), electron_charge=1.0,
                k_e=1.0, lam=0.1, omega_beta=1.0)
    for field, bad in [("n_molecules", 0), ("k_e", -1.0), ("omega_beta", 0.0), ("lam", -0.1)]:
        with pytest.raises(ValueError, match=field.split("_")[0]):
            EnsembleConfig(**{**base, field: bad})
    with pytest.raises(ValueError):
        EnsembleConfig(**{**base, "nuclear_charges": (1.0, 2.0)})
    with pytest.raises(ValueError):
        EnsembleConfig(**{**base, "level": "xx"})


def test_neutrality_flag(generic_config, co2):
    assert not generic_config.is_neutral
    assert co2.ensemble(3, 0.1).is_neutral


def test_state_shape_checked(generic_config):
    st_ = SystemState.at_rest(generic_config.with_(n_molecules=2))
    with pytest.raises(ValueError, match="shape"):
        solve_dressed_electrons(generic_config, st_)


def test_uncoupled_levels_agree(generic_config, rng):
    cfg = generic_config.with_(lam=0.0)
    state = random_state(cfg, rng)
    sols = [solve_dressed_electrons(cfg, state, level) for level in ApproximationLevel]
    centroid = state.positions.mean(axis=1)
    for sol in sols:
        np.testing.assert_allclose(sol.r_expect, centroid, rtol=1e-14)
        assert sol.e_perp == 0.0
        assert sol.nu2 == sols[0].nu2


def test_x_expect_is_weighted_sum(generic_config, rng):
    state = random_state(generic_config, rng)
    sol = solve_dressed_electrons(generic_config, state)
    assert sol.x_expect == pytest.approx(-generic_config.lam * generic_config.electron_charge
                                         * sol.r_expect.sum(), rel=1e-14)
    assert sol.nu2 > 0


def test_self_consistency_residual(generic_config, rng):
    cfg = generic_config
    state = random_state(cfg, rng)
    state.external_field = rng.normal(size=cfg.n_molecules)
    sol = solve_dressed_electrons(cfg, state)
    X = cfg.lam * np.sum(state.positions @ cfg.charges)
    e_perp = cfg.lam * (cfg.omega_beta * state.q_beta - X - sol.x_expect)
    rhs = (cfg.k_e * state.positions.sum(axis=1) - cfg.electron_charge * e_perp
           + cfg.electron_charge * state.field_per_molecule(cfg.n_molecules)) / (cfg.nuclei_per_molecule * cfg.k_e)
    np.testing.assert_allclose(rhs, sol.r_expect, rtol=1e-12)
    assert sol.e_perp == pytest.approx(e_perp, rel=1e-12)


def test_transverse_field_screened_form(generic_config, rng):
    cfg = generic_config
    state = random_state(cfg, rng)
    sol = solve_dressed_electrons(cfg, state)
    expected = cfg.gamma2 * cfg.lam * (cfg.omega_beta * state.q_beta - screened_dipole(cfg, state.positions))
    assert sol.e_perp == pytest.approx(expected, rel=1e-12)


def test_nu2_independent_of_state(generic_config, rng):
    a = solve_dressed_electrons(generic_config, random_state(generic_config, rng))
    b = solve_dressed_electrons(generic_config, random_state(generic_config, rng))
    assert a.nu2 == b.nu2
    assert a.nu2 == pytest.approx(np.sqrt((generic_config.lam * generic_config.electron_charge) ** 2
                                          + 3 * generic_config.k_e))


def test_eta_from_nu1(generic_config, rng):
    sol = solve_dressed_electrons(generic_config, random_state(generic_config, rng))
    np.testing.assert_allclose(sol.eta, sol.nu1 / np.sqrt(2 * sol.nu2**3))
    np.testing.assert_allclose(sol.nu1, -sol.nu2**2 * sol.r_expect)


@pytest.mark.parametrize("level", list(ApproximationLevel))
def test_expectations_match_oracle(generic_config, rng, level):
    cfg = generic_config.with_(level=level)
    state = random_state(cfg, rng)
    state.external_field = rng.normal(size=cfg.n_molecules)
    sol = solve_dressed_electrons(cfg, state)
    mini = oracle.electronic_minimize(oracle.build_quadratic(cfg, external_field=state.external_field),
                                      state.positions, state.q_beta)
    np.testing.assert_allclose(sol.r_expect, mini.r, rtol=1e-12, atol=1e-14)


def test_neutral_atom_force_screening():
    cfg = EnsembleConfig(n_molecules=2, nuclear_masses=(1.0,), nuclear_charges=(3.0,), electron_charge=3.0,
                         k_e=1.0, lam=0.2, omega_beta=1.0, nuclear_potential="none")
    assert cfg.screened_charges[0] == 0.0


def test_electronic_energy_bare_ground_state(generic_config):
    cfg = generic_config.with_(lam=0.0)
    e = electronic_energy(cfg, SystemState.at_rest(cfg))
    assert e == pytest.approx(cfg.n_molecules * np.sqrt(3 * cfg.k_e) / 2, rel=1e-14)


def test_electronic_energy_single_molecule_zero_point(generic_config):
    cfg = generic_config.with_(n_molecules=1)
    e = electronic_energy(cfg, SystemState.at_rest(cfg))
    nu2 = np.sqrt((cfg.lam * cfg.electron_charge) ** 2 + 3 * cfg.k_e)
    assert e == pytest.approx(nu2 / 2, rel=1e-14)


def test_electronic_energy_matches_oracle(generic_config, rng):
    cfg = generic_config.with_(n_molecules=2)
    state = random_state(cfg, rng)
    ref = oracle.electronic_minimize(oracle.build_quadratic(cfg), state.positions, state.q_beta)
    assert electronic_energy(cfg, state) == pytest.approx(ref.energy, rel=1e-12)


def test_electronic_energy_requires_sc(generic_config):
    with pytest.raises(ValueError):
        electronic_energy(generic_config.with_(level="D"), SystemState.at_rest(generic_config))


def test_co2_fast_path_matches_general(co2, rng):
    cfg = co2.ensemble(5, 0.03)
    state = random_state(cfg, rng)
    a = solve_dressed_electrons(cfg, state)
    b = solve_dressed_electrons(cfg, state, fast_path=True)
    assert b.e_perp == pytest.approx(a.e_perp, rel=1e-12)
    np.testing.assert_allclose(b.r_expect, a.r_expect, rtol=1e-12)


def test_co2_fast_path_rejects_non_neutral(rng):
    cfg = CO2Preset(z_e=4.0).ensemble(3, 0.03)
    with pytest.raises(NonNeutralMoleculeError):
        solve_dressed_electrons(cfg, random_state(cfg, rng), fast_path=True)


def test_fast_path_rejects_other_shapes(generic_config, rng):
    with pytest.raises(ValueError, match="CO2"):
        solve_dressed_electrons(generic_config, random_state(generic_config, rng), fast_path=True)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), nn=st.integers(1, 4), lam=st.floats(0, 0.5),
       level=st.sampled_from(list(ApproximationLevel)))
def test_expectations_match_oracle_property(seed, n, nn, lam, level):
    rng = np.random.default_rng(seed)
    cfg = EnsembleConfig(n_molecules=n, nuclear_masses=tuple(rng.uniform(1, 10, nn)),
                         nuclear_charges=tuple(rng.uniform(0.1, 3, nn)), electron_charge=float(rng.uniform(0.5, 3)),
                         k_e=float(rng.uniform(0.3, 3)), lam=lam, omega_beta=float(rng.uniform(0.2, 2)),
                         k_n=float(rng.uniform(0, 2)), level=level)
    state = random_state(cfg, rng)
    sol = solve_dressed_electrons(cfg, state)
    mini = oracle.electronic_minimize(oracle.build_quadratic(cfg), state.positions, state.q_beta)
    scale = max(np.abs(mini.r).max(), 1.0)
    np.testing.assert_allclose(sol.r_expect, mini.r, rtol=1e-10, atol=1e-12 * scale)
