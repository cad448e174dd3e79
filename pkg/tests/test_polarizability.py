import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harmonic_vsc import oracle
from harmonic_vsc.co2 import CO2Preset
from harmonic_vsc.model import EnsembleConfig
from harmonic_vsc.polarizability import (
    ALL_KINDS,
    ENSEMBLE,
    ENSEMBLE_J,
    LOCAL_I,
    LOCAL_IJ,
    PolarizabilityKind,
    Scope,
    ScalingRecipeViolation,
    bare_polarizability,
    perturbative_polarizability,
    polarizability_table,
    self_consistent_polarizability,
    tavis_cummings_limit,
    truncated_local_response,
    verify_scaling_recipe,
)


def unit_config(n=1, lam=0.0):
    return EnsembleConfig(n_molecules=n, nuclear_masses=(1.0,), nuclear_charges=(1.0,), electron_charge=1.0,
                          k_e=1.0, lam=lam, omega_beta=1.0)


def sc(kind, cfg, pair=None):
    return self_consistent_polarizability(kind, cfg, pair, with_limit=False).value


def test_bare_co2(co2):
    total, single = bare_polarizability(co2.ensemble(4, 0.0))
    assert single == pytest.approx(25.0 / 3.0, rel=1e-15)
    assert total == pytest.approx(4 * 25.0 / 3.0, rel=1e-15)


def test_bare_unit_case():
    assert bare_polarizability(unit_config()) == (1.0, 1.0)


def test_kind_labels_are_one_to_one():
    labels = {k.label for k in ALL_KINDS}
    assert labels == {"ensemble", "local_i", "ensemble_j", "local_ij"}
    assert PolarizabilityKind.from_label("ensemble_j") == ENSEMBLE_J


def test_uncoupled_limit(co2):
    cfg = co2.ensemble(5, 0.0)
    a = 25.0 / 3.0
    assert sc(ENSEMBLE, cfg) == pytest.approx(5 * a)
    assert sc(LOCAL_I, cfg) == pytest.approx(a)
    assert sc(ENSEMBLE_J, cfg) == pytest.approx(a)
    assert sc(LOCAL_IJ, cfg, (2, 2)) == pytest.approx(a)
    assert sc(LOCAL_IJ, cfg, (1, 2)) == 0.0


@given(n=st.integers(1, 1000), lam=st.floats(0, 1))
def test_sum_rule(n, lam):
    cfg = CO2Preset().ensemble(n, lam)
    assert sc(ENSEMBLE, cfg) == pytest.approx(n * sc(LOCAL_I, cfg), rel=1e-14)


@given(n=st.integers(2, 1000), lam=st.floats(0, 1))
def test_local_decomposition(n, lam):
    cfg = CO2Preset().ensemble(n, lam)
    total = sc(LOCAL_IJ, cfg, (1, 1)) + (n - 1) * sc(LOCAL_IJ, cfg, (2, 1))
    assert sc(ENSEMBLE_J, cfg) == pytest.approx(total, rel=1e-12, abs=1e-14)


@given(n=st.integers(2, 1000), lam=st.floats(1e-3, 1))
def test_perturbative_gap(n, lam):
    cfg = CO2Preset().ensemble(n, lam)
    assert abs(sc(LOCAL_I, cfg) - perturbative_polarizability("local", cfg).value) > 0


def test_local_response_decreases_in_n_and_lambda(co2):
    values_n = [sc(LOCAL_I, co2.ensemble(n, 0.05)) for n in (1, 2, 5, 10, 100)]
    values_l = [sc(LOCAL_I, co2.ensemble(10, lam)) for lam in (0.0, 0.01, 0.05, 0.1, 0.5)]
    assert np.all(np.diff(values_n) < 0)
    assert np.all(np.diff(values_l) < 0)


def test_pair_indices_validated(co2):
    with pytest.raises(ValueError):
        self_consistent_polarizability(LOCAL_IJ, co2.ensemble(3, 0.1), (0, 1))
    with pytest.raises(ValueError):
        self_consistent_polarizability(LOCAL_IJ, co2.ensemble(3, 0.1), (1, 4))


@pytest.mark.parametrize("kind,pair", [(ENSEMBLE, (1, 1)), (LOCAL_I, (1, 1)), (ENSEMBLE_J, (1, 1)),
                                       (LOCAL_IJ, (1, 1)), (LOCAL_IJ, (2, 3))],
                         ids=["ensemble", "local_i", "ensemble_j", "local_ii", "local_ij"])
def test_oracle_finite_difference_co2(co2, kind, pair):
    cfg = co2.ensemble(4, 0.05)
    value = sc(kind, cfg, pair if kind == LOCAL_IJ else None)
    i, j = pair[0] - 1, pair[1] - 1
    coarse, fine, extrapolated = oracle.richardson_response(cfg, kind.perturbation.value, kind.response.value,
                                                            i=i, j=j, step=1e-4)
    # exactly linear response: both steps agree with each other and with the closed form
    assert fine == pytest.approx(coarse, rel=1e-8)
    assert value == pytest.approx(fine, rel=1e-8)
    assert value == pytest.approx(extrapolated, rel=1e-8)


def test_oracle_bare_ensemble_response(co2):
    cfg = co2.ensemble(6, 0.0)
    assert oracle.static_response(cfg, "ensemble", "ensemble") == pytest.approx(6 * 25.0 / 3.0, rel=1e-12)


def test_perturbative_values(co2):
    cfg = co2.ensemble(7, 0.1)
    local = perturbative_polarizability("local", cfg).value
    assert local == pytest.approx(25.0 / (0.01 * 25.0 + 3.0), rel=1e-14)
    assert perturbative_polarizability(Scope.ENSEMBLE, cfg).value == pytest.approx(7 * local)
    assert perturbative_polarizability("local", co2.ensemble(7, 0.0)).value == pytest.approx(25.0 / 3.0)


def test_perturbative_tends_to_bare_under_collective_scaling(co2):
    values = [perturbative_polarizability("local", co2.ensemble(n, 0.3 / np.sqrt(n))).value
              for n in (1, 10, 100, 10**4, 10**6)]
    assert np.all(np.diff(values) > 0)
    assert values[-1] == pytest.approx(25.0 / 3.0, rel=1e-5)


def test_perturbative_single_molecule_equals_self_consistent(co2):
    cfg = co2.ensemble(1, 0.3)
    assert perturbative_polarizability("local", cfg).value == pytest.approx(sc(LOCAL_I, cfg), rel=1e-14)


def test_sum_over_states_single_molecule(co2):
    cfg = co2.ensemble(1, 0.2)
    expected = (25.0 / 3.0) / (1 + 0.04 * 25.0 / 3.0)
    assert oracle.sum_over_states_polarizability(cfg) == pytest.approx(expected, rel=1e-10)


def test_tc_limits_uncoupled(co2):
    cfg = co2.ensemble(1, 0.0)
    a = 25.0 / 3.0
    for kind in (ENSEMBLE, LOCAL_I, ENSEMBLE_J):
        assert tavis_cummings_limit(kind, 0.0, cfg) == pytest.approx(a)
    assert tavis_cummings_limit(LOCAL_IJ, 0.0, cfg, same_molecule=False) == 0.0
    assert tavis_cummings_limit(LOCAL_IJ, 0.0, cfg, same_molecule=True) == pytest.approx(a)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.label)
def test_tc_limit_convergence_monotone(co2, kind):
    lam_col = 0.2
    base = co2.ensemble(1, lam_col)
    same = kind != LOCAL_IJ
    limit = tavis_cummings_limit(kind, lam_col, base, same_molecule=same)
    gaps = []
    for n in (1, 10, 100, 1000):
        cfg = co2.ensemble(n, lam_col / np.sqrt(n))
        value = sc(kind, cfg, None if kind != LOCAL_IJ else (1, 2 if n > 1 else 1))
        if kind == ENSEMBLE:
            value /= n
        if kind == LOCAL_IJ and n == 1:
            continue
        gaps.append(abs(value - limit))
    # the ensemble kind is exactly N-invariant, so allow rounding noise
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-2 * abs(25.0 / 3.0)


def test_truncated_form_agrees_to_first_order_when_unit_stiffness():
    # N_n k_e = 1 makes alpha_i = Z_e^2
    cfg = EnsembleConfig(n_molecules=6, nuclear_masses=(1.0,), nuclear_charges=(1.5,), electron_charge=1.5,
                         k_e=1.0, lam=0.0, omega_beta=1.0)
    for kind, same in ((ENSEMBLE_J, True), (LOCAL_IJ, True), (LOCAL_IJ, False)):
        errs = []
        for lam in (1e-2, 5e-3):
            c = cfg.with_(lam=lam)
            exact = sc(kind, c, (1, 1) if same else (1, 2))
            errs.append(abs(truncated_local_response(kind, c, same) - exact))
        # error is O(lam^4): halving lam shrinks it ~16x
        assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.05)


def test_truncated_form_rejects_collective_kinds(co2):
    with pytest.raises(ValueError):
        truncated_local_response(ENSEMBLE, co2.ensemble(2, 0.1))


@pytest.mark.parametrize("n", [1, 2, 10, 100, 10**4])
@pytest.mark.parametrize("lam_col", [0.0, 0.1, 0.3])
def test_scaling_recipe(co2, n, lam_col):
    rep = verify_scaling_recipe(co2.ensemble(n, 0.0), lam_col)
    assert rep.passed
    if n >= 2 and lam_col > 0:
        assert rep.pert_ensemble_member > rep.sc_single


def test_scaling_recipe_violation_is_loud(co2, monkeypatch):
    import harmonic_vsc.polarizability as pol

    monkeypatch.setattr(pol, "perturbative_polarizability",
                        lambda scope, cfg: pol.PolarizabilityReport(LOCAL_I, "perturbative", 1.0, 1, 0.0))
    with pytest.raises(ScalingRecipeViolation):
        verify_scaling_recipe(co2.ensemble(4, 0.0), 0.3)


def test_table_rows(co2):
    rows = polarizability_table(co2.ensemble(1, 0.0), [1, 3], [0.0, 0.1])
    kinds = {(r[0], r[1]) for r in rows}
    assert ("local_ij", "self_consistent") in kinds and ("local_ii", "self_consistent") in kinds
    assert all(len(r) == 6 for r in rows)
    for r in rows:
        if r[1] == "bare":
            assert r[3] in (0.0, 0.1)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8), nn=st.integers(1, 4), lam=st.floats(0, 0.5))
def test_all_kinds_match_oracle_property(seed, n, nn, lam):
    rng = np.random.default_rng(seed)
    cfg = EnsembleConfig(n_molecules=n, nuclear_masses=(1.0,) * nn, nuclear_charges=tuple(rng.uniform(0.1, 3, nn)),
                         electron_charge=float(rng.uniform(0.5, 3)), k_e=float(rng.uniform(0.3, 3)), lam=lam,
                         omega_beta=1.0)
    for kind in ALL_KINDS:
        pair = (1, min(2, n))
        value = sc(kind, cfg, pair if kind == LOCAL_IJ else None)
        ref = oracle.static_response(cfg, kind.perturbation.value, kind.response.value, i=pair[0] - 1,
                                     j=pair[1] - 1)
        assert value == pytest.approx(ref, rel=1e-8, abs=1e-12)
