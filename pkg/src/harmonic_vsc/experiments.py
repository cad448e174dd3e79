"""Composite runs shared by the CLI, the scripts and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cavity import DisplacementInstabilityError, renormalized_frequency
from .co2 import CO2Preset, analytic_mode_dynamics
from .dynamics import ThermostatParams, forces, run_trajectories, verlet_frequency
from .model import ApproximationLevel, EnsembleConfig, SystemState, potential_gradient
from .spectra import dominant_pair, find_peaks, fit_power_law, rabi_splitting, trajectory_spectra
from .units import au_to_cm1


def cavity_force_on_nuclei(config: EnsembleConfig, state: SystemState, level) -> np.ndarray:
    """Nuclear force minus the force of the same configuration at ``lam = 0``."""
    coupled, _ = forces(config, state, level)
    bare, _ = forces(config.with_(lam=0.0), state, level)
    return coupled - bare


@dataclass(frozen=True)
class DecouplingRow:
    level: str
    max_cavity_force: float
    max_bare_force: float
    decoupled: bool


def neutral_atom_decoupling(n_molecules: int = 4, lam: float = 0.3, omega_beta: float = 0.5,
                            charge: float = 2.0, n_states: int = 50, seed: int = 0,
                            atol: float = 1e-12) -> list:
    """Cavity force on neutral atoms (one nucleus, ``Z_n = Z_e``) at every level.

    States are random in both ``q_beta`` and ``R``. ``decoupled`` means the
    cavity part of the nuclear force stayed below ``atol`` relative to the
    photon-field scale ``lam * omega * |q|``.
    """
    cfg = EnsembleConfig(n_molecules=n_molecules, nuclear_masses=(1836.0,), nuclear_charges=(charge,),
                         electron_charge=charge, k_e=1.0, lam=lam, omega_beta=omega_beta,
                         nuclear_potential="none")
    rng = np.random.default_rng(seed)
    rows = []
    states = []
    for _ in range(n_states):
        pos = rng.normal(scale=2.0, size=(n_molecules, 1))
        states.append(SystemState(pos, np.zeros_like(pos), q_beta=float(rng.normal(scale=5.0))))
    for level in ApproximationLevel:
        worst = 0.0
        bare = 0.0
        scale = 0.0
        for st in states:
            worst = max(worst, float(np.max(np.abs(cavity_force_on_nuclei(cfg, st, level)))))
            bare = max(bare, float(np.max(np.abs(potential_gradient(cfg, st.positions)))))
            scale = max(scale, lam * omega_beta * abs(st.q_beta) * charge)
        rows.append(DecouplingRow(level.value, worst, bare, worst <= atol * max(scale, 1.0)))
    return rows


@dataclass(frozen=True)
class ComparisonRow:
    level: str
    analytic_photon: float
    md_photon_peak: float
    peak_shift_cm1: float
    max_cavity_force: float
    status: str


def approximation_compare(config: EnsembleConfig, thermostat: ThermostatParams, n_steps: int,
                          sample_stride: int = 5, n_seeds: int = 1, window: str = "hann",
                          max_lag: Optional[int] = None, rel_threshold: float = 0.05,
                          force_samples: int = 20) -> list:
    """Run the same seeds at sc, be and D and tabulate the photon peak.

    The photon peak is the strongest peak of the ``q_beta`` spectrum;
    ``peak_shift_cm1`` is its offset from the bare cavity frequency. The
    largest cavity force on the nuclei is sampled on random states. Level D
    past its stability limit is reported, not run.
    """
    rows = []
    rng = np.random.default_rng(thermostat.rng_seed)
    shape = (config.n_molecules, config.nuclei_per_molecule)
    states = [SystemState(rng.uniform(-0.1, 0.1, shape), np.zeros(shape), q_beta=float(rng.normal()))
              for _ in range(force_samples)]
    for level in ApproximationLevel:
        cfg = config.with_(level=level)
        force = max(float(np.max(np.abs(cavity_force_on_nuclei(cfg, st, level)))) for st in states)
        try:
            analytic = renormalized_frequency(level, cfg).omega_out
        except DisplacementInstabilityError:
            rows.append(ComparisonRow(level.value, float("nan"), float("nan"), float("nan"), force,
                                      "unstable"))
            continue
        trajs = run_trajectories(cfg, thermostat, n_steps, sample_stride, n_seeds)
        spec = trajectory_spectra(trajs, ("photon",), window, max_lag)["photon"]
        peaks = find_peaks(spec, rel_threshold)
        top = max(peaks, key=lambda p: p.intensity)
        rows.append(ComparisonRow(level.value, float(analytic), top.frequency,
                                  float(au_to_cm1(top.frequency - config.omega_beta)), force, "ok"))
    return rows


def analytic_splitting_scan(preset: CO2Preset, n_values: Sequence[int], lam: float) -> list:
    """``(N, splitting in cm^-1)`` from the 2x2 polariton eigenvalues at fixed ``lam``."""
    rows = []
    for n in n_values:
        rep = analytic_mode_dynamics(preset.ensemble(int(n), lam))
        rows.append((int(n), float(au_to_cm1(rep.rabi_splitting))))
    return rows


def md_splitting_scan(preset: CO2Preset, n_values: Sequence[int], lam: float, thermostat: ThermostatParams,
                      n_steps: int, sample_stride: int = 5, n_seeds: int = 1,
                      rel_threshold: float = 0.05, max_lag: Optional[int] = None) -> list:
    """``(N, MD splitting, analytic splitting)`` in cm^-1 from collective-dipole spectra.

    The MD splitting is taken between the dominant peaks on either side of the
    polariton midpoint.
    """
    rows = []
    for n in n_values:
        cfg = preset.ensemble(int(n), lam)
        rep = analytic_mode_dynamics(cfg)
        trajs = run_trajectories(cfg, thermostat, n_steps, sample_stride, n_seeds)
        spec = trajectory_spectra(trajs, ("collective_dipole",), max_lag=max_lag)["collective_dipole"]
        # the integrator shifts both lines by several cm^-1; centre on where they actually are
        centre = float(np.mean(verlet_frequency(np.array(rep.polaritons), thermostat.dt)))
        split = rabi_splitting(dominant_pair(find_peaks(spec, rel_threshold), centre), centre)
        rows.append((int(n), split, float(au_to_cm1(rep.rabi_splitting))))
    return rows


def splitting_exponent(rows) -> float:
    n = [r[0] for r in rows]
    s = [r[1] for r in rows]
    return fit_power_law(n, s)[0]
