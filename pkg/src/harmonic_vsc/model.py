"""Ensemble of harmonic one-dimensional molecules coupled to one cavity mode.

Each molecule carries one effective electron (charge ``-Z_e``) bound
harmonically (``k_e``) to each of its ``N_n`` nuclei. The electrons are solved
in the cavity Born-Oppenheimer sense: for fixed nuclei and photon displacement
they sit in the (mean-field) ground state, which for this model is a shifted
harmonic oscillator and is available in closed form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np


class ApproximationLevel(str, enum.Enum):
    """Electronic closure used for the dressed electrons.

    ``SC`` solves the full self-consistent problem, ``BE`` keeps the bare
    (uncoupled) electrons and ``D`` drops the dipole self-energy, keeping only
    the coupling to the displacement field.
    """

    SC = "sc"
    BE = "be"
    D = "D"

    @classmethod
    def parse(cls, value) -> "ApproximationLevel":
        if isinstance(value, cls):
            return value
        for level in cls:
            if str(value).lower() == level.value.lower():
                return level
        raise ValueError(f"unknown approximation level {value!r}; expected sc, be or D")


class NonNeutralMoleculeError(ValueError):
    """Raised when a neutral-molecule-only code path gets a charged molecule."""


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of ``N`` identical molecules in a single-mode cavity.

    ``nuclear_potential`` selects the intra-molecular potential ``W``:
    ``"chain"`` couples neighbouring nuclei harmonically with ``k_n``,
    ``"none"`` leaves them free. The compensating electron term is always
    added so that at ``lam = 0`` the nuclei feel exactly ``-dW/dR``.
    """

    n_molecules: int
    nuclear_masses: tuple
    nuclear_charges: tuple
    electron_charge: float
    k_e: float
    lam: float
    omega_beta: float
    k_n: float = 0.0
    nuclear_potential: str = "chain"
    level: ApproximationLevel = ApproximationLevel.SC

    def __post_init__(self):
        object.__setattr__(self, "nuclear_masses", tuple(float(m) for m in self.nuclear_masses))
        object.__setattr__(self, "nuclear_charges", tuple(float(z) for z in self.nuclear_charges))
        object.__setattr__(self, "level", ApproximationLevel.parse(self.level))
        if int(self.n_molecules) != self.n_molecules or self.n_molecules < 1:
            raise ValueError("n_molecules must be a positive integer")
        if len(self.nuclear_masses) < 1:
            raise ValueError("at least one nucleus per molecule is required")
        if len(self.nuclear_charges) != len(self.nuclear_masses):
            raise ValueError("nuclear_charges and nuclear_masses must have the same length")
        if any(m <= 0 for m in self.nuclear_masses):
            raise ValueError("nuclear masses must be positive")
        if not self.k_e > 0:
            raise ValueError("k_e must be positive")
        if not self.omega_beta > 0:
            raise ValueError("omega_beta must be positive")
        if not self.lam >= 0:
            raise ValueError("lam (coupling) must be non-negative")
        if self.k_n < 0:
            raise ValueError("k_n must be non-negative")
        if self.nuclear_potential not in ("chain", "none"):
            raise ValueError("nuclear_potential must be 'chain' or 'none'")

    @property
    def nuclei_per_molecule(self) -> int:
        return len(self.nuclear_masses)

    @property
    def masses(self) -> np.ndarray:
        return np.asarray(self.nuclear_masses)

    @property
    def charges(self) -> np.ndarray:
        return np.asarray(self.nuclear_charges)

    @property
    def screened_charges(self) -> np.ndarray:
        """Nuclear charges minus the electron share, ``Z_n - Z_e/N_n``."""
        return self.charges - self.electron_charge / self.nuclei_per_molecule

    @property
    def is_neutral(self) -> bool:
        return bool(np.isclose(sum(self.nuclear_charges), self.electron_charge, rtol=0, atol=1e-12))

    @property
    def single_polarizability(self) -> float:
        """Bare single-molecule polarizability ``Z_e^2 / (N_n k_e)``."""
        return self.electron_charge**2 / (self.nuclei_per_molecule * self.k_e)

    @property
    def gamma2(self) -> float:
        return gamma_squared(self.n_molecules, self.lam, self.single_polarizability)

    def with_(self, **changes) -> "EnsembleConfig":
        return replace(self, **changes)


@dataclass
class SystemState:
    """Instantaneous nuclear and photonic phase-space point.

    ``external_field`` is either a scalar applied to every molecule or an
    array with one entry per molecule. It couples to the electronic dipole
    ``Z_e r_i`` only.
    """

    positions: np.ndarray
    momenta: np.ndarray
    q_beta: float = 0.0
    p_beta: float = 0.0
    external_field: Optional[Union[float, np.ndarray]] = None

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=float, ndmin=2)
        self.momenta = np.array(self.momenta, dtype=float, ndmin=2)
        if self.positions.shape != self.momenta.shape:
            raise ValueError("positions and momenta must have the same shape")

    @classmethod
    def at_rest(cls, config: EnsembleConfig, positions=None, q_beta=0.0) -> "SystemState":
        shape = (config.n_molecules, config.nuclei_per_molecule)
        pos = np.zeros(shape) if positions is None else np.asarray(positions, dtype=float).reshape(shape)
        return cls(pos, np.zeros(shape), q_beta=q_beta)

    def check(self, config: EnsembleConfig) -> None:
        shape = (config.n_molecules, config.nuclei_per_molecule)
        if self.positions.shape != shape:
            raise ValueError(f"state shape {self.positions.shape} does not match config {shape}")

    def field_per_molecule(self, n_molecules: int) -> np.ndarray:
        if self.external_field is None:
            return np.zeros(n_molecules)
        return np.broadcast_to(np.asarray(self.external_field, dtype=float), (n_molecules,)).copy()

    def copy(self) -> "SystemState":
        ext = self.external_field
        if isinstance(ext, np.ndarray):
            ext = ext.copy()
        return SystemState(self.positions.copy(), self.momenta.copy(), self.q_beta, self.p_beta, ext)


@dataclass(frozen=True)
class DressedElectronSolution:
    nu1: np.ndarray
    nu2: float
    eta: np.ndarray
    r_expect: np.ndarray
    x_expect: float
    e_perp: float


def gamma_squared(n: int, lam: float, alpha_i: float) -> float:
    """Collective screening factor ``1 / (1 + lam^2 N alpha_i)``, in (0, 1]."""
    return 1.0 / (1.0 + lam * lam * n * alpha_i)


def nuclear_dipole(config: EnsembleConfig, positions: np.ndarray) -> float:
    """``X = lam * sum_in Z_n R_in``."""
    return config.lam * float(np.sum(positions @ config.charges))


def screened_dipole(config: EnsembleConfig, positions: np.ndarray) -> float:
    """``X' = lam * sum_in (Z_n - Z_e/N_n) R_in``."""
    return config.lam * float(np.sum(positions @ config.screened_charges))


def electron_stiffness(config: EnsembleConfig, level=None) -> float:
    """``nu_2^2``; the dipole self-energy only stiffens the electron at level sc."""
    level = config.level if level is None else ApproximationLevel.parse(level)
    base = config.nuclei_per_molecule * config.k_e
    if level is ApproximationLevel.SC:
        return base + (config.lam * config.electron_charge) ** 2
    return base


def solve_dressed_electrons(config: EnsembleConfig, state: SystemState, level=None,
                            fast_path: bool = False) -> DressedElectronSolution:
    """Ground-state electronic expectation values for fixed ``(R, q_beta)``.

    At level sc the N coupled mean-field equations are solved exactly by first
    summing them (the lambda-weighted sum closes on itself), so no fixed-point
    iteration is needed. ``fast_path`` evaluates the transverse field through
    the CO2 asymmetric-mode expression, which is only valid for neutral
    molecules.
    """
    level = config.level if level is None else ApproximationLevel.parse(level)
    state.check(config)
    ext = state.field_per_molecule(config.n_molecules)
    if fast_path and level is ApproximationLevel.SC:
        e_perp = _co2_mode_field(config, state)
        r = (config.k_e * state.positions.sum(axis=1) - config.electron_charge * (e_perp - ext)) / (
            config.nuclei_per_molecule * config.k_e)
        x = -config.lam * config.electron_charge * float(r.sum())
    else:
        r, x, e_perp = dressed_expectations(config, state.positions, state.q_beta, ext, level)

    nu2_sq = electron_stiffness(config, level)
    nu2 = float(np.sqrt(nu2_sq))
    nu1 = -nu2_sq * r
    eta = nu1 / np.sqrt(2.0 * nu2**3)
    return DressedElectronSolution(nu1=nu1, nu2=nu2, eta=eta, r_expect=r, x_expect=float(x),
                                   e_perp=float(e_perp))


def dressed_expectations(config: EnsembleConfig, positions: np.ndarray, q_beta: float,
                         ext: Optional[np.ndarray] = None, level=None) -> tuple:
    """Array-level core of :func:`solve_dressed_electrons`: ``(<r_i>, <x>, E_perp)``."""
    level = config.level if level is None else ApproximationLevel.parse(level)
    lam = config.lam
    ze = config.electron_charge
    nn = config.nuclei_per_molecule
    k_e = config.k_e
    wq = config.omega_beta * q_beta
    r_sum = positions.sum(axis=1)
    if ext is None:
        ext = 0.0
        ext_sum = 0.0
    else:
        ext_sum = float(np.sum(ext))
    if level is ApproximationLevel.SC:
        X = nuclear_dipole(config, positions)
        total = config.gamma2 / (nn * k_e) * (k_e * r_sum.sum() - config.n_molecules * ze * lam * (wq - X)
                                              + ze * ext_sum)
        e_perp = lam * (wq - X + lam * ze * total)
        r = (k_e * r_sum - ze * e_perp + ze * ext) / (nn * k_e)
    elif level is ApproximationLevel.D:
        e_perp = lam * wq
        r = (k_e * r_sum - ze * e_perp + ze * ext) / (nn * k_e)
    else:
        X = nuclear_dipole(config, positions)
        r = (r_sum + ze * ext / k_e) / nn
        e_perp = lam * (wq - X + lam * ze * float(r.sum()))
    x = -lam * ze * float(r.sum())
    return r, x, float(e_perp)


def _co2_mode_field(config: EnsembleConfig, state: SystemState) -> float:
    from .co2 import mode_transverse_field

    if state.external_field is not None and np.any(state.field_per_molecule(config.n_molecules)):
        raise ValueError("the normal-mode field expression has no external-field term")
    return mode_transverse_field(config, state.positions, state.q_beta)


def electronic_energy(config: EnsembleConfig, state: SystemState) -> float:
    """Total ground-state electronic energy at level sc.

    Sum of the single-molecule shifted-oscillator energies minus the doubly
    counted dipole-dipole energy.
    """
    if config.level is not ApproximationLevel.SC:
        raise ValueError("electronic_energy is defined for level sc only")
    sol = solve_dressed_electrons(config, state)
    eps = sol.nu2 / 2.0 - sol.nu1**2 / (2.0 * sol.nu2**2)
    lz2 = (config.lam * config.electron_charge) ** 2
    return float(eps.sum() - 0.5 * (sol.x_expect**2 - lz2 * np.sum(sol.r_expect**2)))


def potential_gradient(config: EnsembleConfig, positions: np.ndarray) -> np.ndarray:
    """``dW/dR`` for every nucleus, shape ``(N, N_n)``."""
    grad = np.zeros_like(positions)
    if config.nuclear_potential == "none" or config.nuclei_per_molecule == 1 or config.k_n == 0:
        return grad
    bond = config.k_n * (positions[:, :-1] - positions[:, 1:])
    grad[:, :-1] += bond
    grad[:, 1:] -= bond
    return grad


def potential_energy_w(config: EnsembleConfig, positions: np.ndarray) -> float:
    if config.nuclear_potential == "none" or config.nuclei_per_molecule == 1:
        return 0.0
    return 0.5 * config.k_n * float(np.sum(np.diff(positions, axis=1) ** 2))


def local_dipoles(config: EnsembleConfig, positions: np.ndarray, sol: DressedElectronSolution) -> np.ndarray:
    """Per-molecule dipole ``sum_n Z_n R_in - Z_e <r_i>`` (no coupling factor)."""
    return positions @ config.charges - config.electron_charge * sol.r_expect
