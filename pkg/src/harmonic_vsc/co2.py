"""Linear one-dimensional CO2: preset parameters and normal-mode analysis.

Nuclei are ordered O, C, O. Normal coordinates are mass weighted, so the
Cartesian <-> mode transform is an orthogonal matrix acting on
``sqrt(M_n) R_n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ApproximationLevel, EnsembleConfig, NonNeutralMoleculeError, gamma_squared


@dataclass(frozen=True)
class CO2Preset:
    m_o: float = 29166.0
    m_c: float = 21874.0
    z_o: float = 2.0
    z_c: float = 1.0
    z_e: float = 5.0
    k_e: float = 1.0
    sqrt_ka: float = 0.0116

    def __post_init__(self):
        if self.m_o <= 0 or self.m_c <= 0:
            raise ValueError("masses must be positive")
        if self.k_e <= 0 or self.sqrt_ka <= 0:
            raise ValueError("k_e and sqrt_ka must be positive")

    @property
    def total_mass(self) -> float:
        return 2 * self.m_o + self.m_c

    @property
    def k_n(self) -> float:
        """Bond force constant reproducing ``sqrt_ka`` for the bare molecule."""
        return self.sqrt_ka**2 * self.m_o * self.m_c / self.total_mass

    @property
    def k_s(self) -> float:
        return self.k_n / self.m_o

    @property
    def k_a(self) -> float:
        return self.total_mass * self.k_n / (self.m_o * self.m_c)

    @property
    def is_neutral(self) -> bool:
        return abs(2 * self.z_o + self.z_c - self.z_e) < 1e-12

    @property
    def epsilon_a(self) -> float:
        """Weight of the asymmetric mode in the screened molecular dipole."""
        m = self.total_mass
        return np.sqrt(2 * m) * (self.z_c - self.z_o) / (3 * np.sqrt(self.m_c) * np.sqrt(self.m_o))

    def ensemble(self, n_molecules: int, lam: float, omega_beta=None,
                 level=ApproximationLevel.SC) -> EnsembleConfig:
        """Build an :class:`EnsembleConfig`; ``omega_beta=None`` tunes the cavity to ``sqrt(k_a)``."""
        return EnsembleConfig(
            n_molecules=n_molecules,
            nuclear_masses=(self.m_o, self.m_c, self.m_o),
            nuclear_charges=(self.z_o, self.z_c, self.z_o),
            electron_charge=self.z_e,
            k_e=self.k_e,
            lam=lam,
            omega_beta=np.sqrt(self.k_a) if omega_beta is None else omega_beta,
            k_n=self.k_n,
            nuclear_potential="chain",
            level=level,
        )


def preset_from_config(config: EnsembleConfig) -> CO2Preset:
    """Recover the CO2 parameters from an ensemble; rejects anything else."""
    m = config.nuclear_masses
    z = config.nuclear_charges
    if config.nuclei_per_molecule != 3 or m[0] != m[2] or z[0] != z[2]:
        raise ValueError("not a CO2 ensemble: need three nuclei ordered O, C, O")
    if config.nuclear_potential != "chain":
        raise ValueError("not a CO2 ensemble: nearest-neighbour chain potential required")
    m_o, m_c = m[0], m[1]
    k_a = (2 * m_o + m_c) * config.k_n / (m_o * m_c)
    return CO2Preset(m_o=m_o, m_c=m_c, z_o=z[0], z_c=z[1], z_e=config.electron_charge,
                     k_e=config.k_e, sqrt_ka=float(np.sqrt(k_a)))


def mode_matrix(preset: CO2Preset) -> np.ndarray:
    """Orthogonal matrix mapping mass-weighted coordinates to (t, s, a)."""
    m = preset.total_mass
    so, sc = np.sqrt(preset.m_o), np.sqrt(preset.m_c)
    return np.array([
        [so, sc, so] / np.sqrt(m),
        [1.0, 0.0, -1.0] / np.sqrt(2.0),
        [sc, -2 * so, sc] / np.sqrt(2 * m),
    ])


@dataclass(frozen=True)
class NormalModes:
    rho_t: np.ndarray
    rho_s: np.ndarray
    rho_a: np.ndarray
    epsilon_a: float

    @property
    def rho_a_collective(self) -> float:
        return float(self.rho_a.sum())


def normal_mode_transform(preset: CO2Preset, positions) -> NormalModes:
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    if pos.shape[-1] != 3:
        raise ValueError(f"CO2 positions need three nuclei per molecule, got shape {pos.shape}")
    sqrt_m = np.sqrt([preset.m_o, preset.m_c, preset.m_o])
    rho = (pos * sqrt_m) @ mode_matrix(preset).T
    return NormalModes(rho[:, 0], rho[:, 1], rho[:, 2], preset.epsilon_a)


def inverse_normal_mode_transform(preset: CO2Preset, modes: NormalModes) -> np.ndarray:
    rho = np.column_stack([modes.rho_t, modes.rho_s, modes.rho_a])
    sqrt_m = np.sqrt([preset.m_o, preset.m_c, preset.m_o])
    return (rho @ mode_matrix(preset)) / sqrt_m


def mode_transverse_field(config: EnsembleConfig, positions: np.ndarray, q_beta: float) -> float:
    """Self-consistent ``E_perp`` from the collective asymmetric mode and ``q_beta``."""
    preset = preset_from_config(config)
    if not preset.is_neutral:
        raise NonNeutralMoleculeError(
            "the normal-mode field expression assumes neutral molecules (2 Z_O + Z_C = Z_e)")
    rho_a = normal_mode_transform(preset, positions).rho_a_collective
    lam = config.lam
    return lam * config.gamma2 * (config.omega_beta * q_beta + lam * preset.epsilon_a * rho_a)


@dataclass(frozen=True)
class ModeDynamicsReport:
    k_s: float
    k_a: float
    k_a_dressed: float
    omega_dressed: float
    gamma2: float
    epsilon_a: float
    dynamical_matrix: np.ndarray
    symmetric_matrix: np.ndarray
    polaritons: tuple
    field_couplings: tuple

    @property
    def lower_polariton(self) -> float:
        return self.polaritons[0]

    @property
    def upper_polariton(self) -> float:
        return self.polaritons[1]

    @property
    def rabi_splitting(self) -> float:
        return self.polaritons[1] - self.polaritons[0]

    def frequency_table(self, n_molecules: int) -> dict:
        """All cavity-Born-Oppenheimer frequencies with multiplicities."""
        return {
            "translation": (0.0, n_molecules),
            "symmetric": (float(np.sqrt(self.k_s)), n_molecules),
            "dark_asymmetric": (float(np.sqrt(self.k_a)), n_molecules - 1),
            "lower_polariton": (self.lower_polariton, 1),
            "upper_polariton": (self.upper_polariton, 1),
        }


def analytic_mode_dynamics(config: EnsembleConfig) -> ModeDynamicsReport:
    """Normal-mode coefficients of the self-consistent CO2 ensemble.

    The collective asymmetric coordinate and ``q_beta`` obey a closed 2x2
    linear system; its eigenfrequencies are the lower and upper polaritons.
    """
    if config.level is not ApproximationLevel.SC:
        raise ValueError("analytic mode dynamics are derived for level sc")
    preset = preset_from_config(config)
    if not preset.is_neutral:
        raise NonNeutralMoleculeError("analytic mode dynamics require neutral molecules")
    n = config.n_molecules
    lam = config.lam
    w = config.omega_beta
    g2 = gamma_squared(n, lam, config.single_polarizability)
    eps = preset.epsilon_a
    k_a = preset.k_a
    k_a_dressed = k_a + n * eps**2 * lam**2 * g2
    omega_dressed = np.sqrt(g2) * w
    # (rho_a collective, q_beta): second time derivative = -D @ (rho_a, q)
    dyn = np.array([
        [k_a_dressed, n * eps * lam * g2 * w],
        [g2 * w * eps * lam, g2 * w**2],
    ])
    off = np.sqrt(n) * eps * lam * g2 * w
    sym = np.array([[k_a_dressed, off], [off, g2 * w**2]])
    # mode acceleration per unit E_perp: (t, s, a) rows against Z'_n / sqrt(M_n)
    sqrt_m = np.sqrt([preset.m_o, preset.m_c, preset.m_o])
    couplings = tuple(float(c) for c in mode_matrix(preset) @ (config.screened_charges / sqrt_m))
    eig = np.linalg.eigvalsh(sym)
    if eig[0] < 0:
        raise ValueError("collective mode matrix is not positive definite")
    pol = tuple(float(v) for v in np.sqrt(eig))
    return ModeDynamicsReport(
        k_s=preset.k_s, k_a=k_a, k_a_dressed=float(k_a_dressed), omega_dressed=float(omega_dressed),
        gamma2=g2, epsilon_a=float(eps), dynamical_matrix=dyn, symmetric_matrix=sym, polaritons=pol,
        field_couplings=couplings,
    )
