"""Cavity-side closed forms: coupling, resonance wavelength, mode renormalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ApproximationLevel, EnsembleConfig


class DisplacementInstabilityError(ValueError):
    """Level D renormalized frequency becomes imaginary (gamma^2 <= 1/2)."""

    def __init__(self, gamma2: float, omega_beta: float):
        self.gamma2 = gamma2
        self.omega_beta = omega_beta
        super().__init__(
            f"level D photon mode is unstable: gamma^2 = {gamma2:.6g} <= 1/2 gives "
            f"omega^2 = {(2 - 1 / gamma2) * omega_beta**2:.6g} < 0 (no ground state)")


@dataclass(frozen=True)
class RedshiftReport:
    level: ApproximationLevel
    omega_in: float
    omega_out: float
    gamma2: float
    n_r: Optional[float] = None

    @property
    def ratio(self) -> float:
        return self.omega_out / self.omega_in


def coupling_from_mode_volume(volume: float) -> float:
    if not volume > 0:
        raise ValueError("mode volume must be positive")
    return float(np.sqrt(4 * np.pi / volume))


def mode_volume_from_coupling(lam: float) -> float:
    if not lam > 0:
        raise ValueError("coupling must be positive")
    return 4 * np.pi / lam**2


def fabry_perot_wavelength(length: float, n_r: float, mode_order: int) -> float:
    if not length > 0:
        raise ValueError("cavity length must be positive")
    if n_r < 1:
        raise ValueError("refractive index must be >= 1")
    if int(mode_order) != mode_order or mode_order < 1:
        raise ValueError("mode order must be a positive integer")
    return 2.0 * n_r * length / mode_order


def check_displacement_stable(config: EnsembleConfig) -> None:
    g2 = config.gamma2
    if g2 <= 0.5:
        raise DisplacementInstabilityError(g2, config.omega_beta)


def renormalized_frequency(level, config: EnsembleConfig) -> RedshiftReport:
    level = ApproximationLevel.parse(level)
    g2 = config.gamma2
    w = config.omega_beta
    if level is ApproximationLevel.SC:
        out = np.sqrt(g2) * w
    elif level is ApproximationLevel.BE:
        out = w
    else:
        check_displacement_stable(config)
        out = np.sqrt(2.0 - 1.0 / g2) * w
    return RedshiftReport(level, w, float(out), g2)


def refractive_index(config: EnsembleConfig, volume: Optional[float] = None) -> float:
    """Dilute-gas refractive index from the bare polarizability density.

    By default the physical volume is identified with the mode volume
    ``4 pi / lam^2``.
    """
    n_alpha = config.n_molecules * config.single_polarizability
    if volume is None:
        return float(np.sqrt(config.lam**2 * n_alpha + 1.0))
    if not volume > 0:
        raise ValueError("volume must be positive")
    return float(np.sqrt(4 * np.pi * n_alpha / volume + 1.0))


def maxwell_redshift(config: EnsembleConfig, volume: Optional[float] = None) -> RedshiftReport:
    n_r = refractive_index(config, volume)
    return RedshiftReport(ApproximationLevel.SC, config.omega_beta, config.omega_beta / n_r,
                          config.gamma2, n_r)


def redshift_scan(config: EnsembleConfig, lam_values) -> list:
    """Rows ``(lam, sc/omega, D/omega, be/omega)``; D is NaN past its instability."""
    rows = []
    for lam in lam_values:
        cfg = config.with_(lam=float(lam))
        sc = renormalized_frequency("sc", cfg).ratio
        be = renormalized_frequency("be", cfg).ratio
        try:
            d = renormalized_frequency("D", cfg).ratio
        except DisplacementInstabilityError:
            d = float("nan")
        rows.append((float(lam), sc, d, be))
    return rows
