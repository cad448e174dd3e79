"""Randomized comparison of every closed form against the quadratic oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .co2 import CO2Preset, analytic_mode_dynamics
from .dynamics import forces
from .model import (
    ApproximationLevel,
    EnsembleConfig,
    SystemState,
    electronic_energy,
    solve_dressed_electrons,
)
from .polarizability import ALL_KINDS, LOCAL_IJ, self_consistent_polarizability
from .cavity import renormalized_frequency

ABS_FLOOR = 1e-12


def relative_error(value, reference) -> float:
    """Norm-wise relative error with a tiny absolute floor for exact zeros."""
    a = np.atleast_1d(np.asarray(value, dtype=float))
    b = np.atleast_1d(np.asarray(reference, dtype=float))
    scale = max(np.linalg.norm(a), np.linalg.norm(b), ABS_FLOOR)
    return float(np.linalg.norm(a - b) / scale)


@dataclass
class SweepResult:
    n_draws: int
    tolerance: float
    max_errors: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    worst_draw: dict = field(default_factory=dict)
    seconds: float = 0.0

    def record(self, name: str, err: float, draw: int) -> None:
        self.counts[name] = self.counts.get(name, 0) + 1
        if err >= self.max_errors.get(name, -1.0):
            self.max_errors[name] = err
            self.worst_draw[name] = draw

    @property
    def passed(self) -> bool:
        return all(err <= self.tolerance for err in self.max_errors.values())

    def table(self) -> list:
        return [(name, self.counts[name], self.max_errors[name], self.max_errors[name] <= self.tolerance)
                for name in sorted(self.max_errors)]


def random_ensemble(rng: np.random.Generator, max_molecules: int = 8, max_nuclei: int = 4,
                    max_lambda: float = 0.5) -> EnsembleConfig:
    """Random (generally non-neutral) ensemble with the given bounds."""
    nn = int(rng.integers(1, max_nuclei + 1))
    return EnsembleConfig(
        n_molecules=int(rng.integers(1, max_molecules + 1)),
        nuclear_masses=tuple(rng.uniform(1.0, 50.0, nn)),
        nuclear_charges=tuple(rng.uniform(0.1, 3.0, nn)),
        electron_charge=float(rng.uniform(0.5, 3.0)),
        k_e=float(rng.uniform(0.3, 3.0)),
        lam=float(rng.uniform(0.0, max_lambda)),
        omega_beta=float(rng.uniform(0.2, 2.0)),
        k_n=float(rng.uniform(0.0, 2.0)),
        nuclear_potential="chain" if rng.random() < 0.8 else "none",
    )


def random_state(config: EnsembleConfig, rng: np.random.Generator, with_field: bool = False) -> SystemState:
    shape = (config.n_molecules, config.nuclei_per_molecule)
    st = SystemState(rng.normal(size=shape), rng.normal(size=shape), q_beta=float(rng.normal()),
                     p_beta=float(rng.normal()))
    if with_field:
        st.external_field = rng.normal(size=config.n_molecules)
    return st


def _check_draw(result: SweepResult, draw: int, cfg: EnsembleConfig, rng: np.random.Generator) -> None:
    st = random_state(cfg, rng)
    for level in ApproximationLevel:
        c = cfg.with_(level=level)
        # expectation values, also with a static field switched on
        for with_field in (False, True):
            s = st.copy()
            if with_field:
                s.external_field = rng.normal(size=cfg.n_molecules)
            sol = solve_dressed_electrons(c, s)
            model = oracle.build_quadratic(c, external_field=s.external_field)
            mini = oracle.electronic_minimize(model, s.positions, s.q_beta)
            x_ref = -c.lam * c.electron_charge * mini.r.sum()
            X = c.lam * float(np.sum(s.positions @ c.charges))
            if level is ApproximationLevel.D:
                e_ref = c.lam * c.omega_beta * s.q_beta
            else:
                e_ref = c.lam * (c.omega_beta * s.q_beta - X - x_ref)
            result.record(f"r_expect[{level.value}]", relative_error(sol.r_expect, mini.r), draw)
            result.record(f"x_expect[{level.value}]", relative_error(sol.x_expect, x_ref), draw)
            result.record(f"e_perp[{level.value}]", relative_error(sol.e_perp, e_ref), draw)
        f_nuc, f_ph = forces(c, st)
        if level is ApproximationLevel.BE:
            full = oracle.build_quadratic(c, ApproximationLevel.SC)
            bare_r = st.positions.sum(axis=1) / c.nuclei_per_molecule
            ref_nuc, ref_ph = oracle.frozen_electron_forces(full, bare_r, st.positions, st.q_beta)
        else:
            model = oracle.build_quadratic(c)
            ref_nuc, ref_ph = oracle.born_oppenheimer_forces(model, st.positions, st.q_beta)
        result.record(f"forces[{level.value}]",
                      relative_error(np.r_[f_nuc.ravel(), f_ph], np.r_[ref_nuc.ravel(), ref_ph]), draw)

    sc = cfg.with_(level=ApproximationLevel.SC)
    model = oracle.build_quadratic(sc)
    result.record("electronic_energy",
                  relative_error(electronic_energy(sc, st),
                                 oracle.electronic_minimize(model, st.positions, st.q_beta).energy), draw)
    n = cfg.n_molecules
    for kind in ALL_KINDS:
        pairs = [(1, 1), (1, 2)] if kind == LOCAL_IJ and n > 1 else [(1, 1)]
        for i, j in pairs:
            value = self_consistent_polarizability(kind, sc, (i, j) if kind == LOCAL_IJ else None,
                                                   with_limit=False).value
            ref = oracle.static_response(sc, kind.perturbation.value, kind.response.value, i=i - 1, j=j - 1)
            label = kind.label if kind != LOCAL_IJ else ("local_ii" if i == j else "local_ij")
            result.record(f"polarizability[{label}]", relative_error(value, ref), draw)
    photon = oracle.full_normal_modes(model, clamp_nuclei=True).frequencies[-1]
    result.record("renormalized_omega", relative_error(renormalized_frequency("sc", sc).omega_out, photon), draw)


def _check_co2_draw(result: SweepResult, draw: int, rng: np.random.Generator) -> None:
    preset = CO2Preset(sqrt_ka=float(rng.uniform(0.005, 0.02)))
    n = int(rng.integers(1, 9))
    omega = float(preset.sqrt_ka * rng.uniform(0.7, 1.3))
    cfg = preset.ensemble(n, float(rng.uniform(0.0, 0.05)), omega_beta=omega)
    report = analytic_mode_dynamics(cfg)
    freqs = oracle.full_normal_modes(oracle.build_quadratic(cfg)).frequencies
    for name, value in (("co2_lower_polariton", report.lower_polariton),
                        ("co2_upper_polariton", report.upper_polariton)):
        nearest = freqs[np.argmin(np.abs(freqs - value))]
        result.record(name, relative_error(value, nearest), draw)


def property_sweep(n_draws: int = 200, seed: int = 0, tolerance: float = 1e-8) -> SweepResult:
    """Compare closed forms with the oracle over ``n_draws`` random ensembles."""
    rng = np.random.default_rng(seed)
    result = SweepResult(n_draws, tolerance)
    start = time.perf_counter()
    for draw in range(n_draws):
        _check_draw(result, draw, random_ensemble(rng), rng)
        _check_co2_draw(result, draw, rng)
    result.seconds = time.perf_counter() - start
    return result
