"""Brute-force reference built from the full quadratic Pauli-Fierz potential.

Coordinates are ordered ``[r_1..r_N, R_11..R_NNn, q_beta]``. The potential is
assembled term by term (electron-nucleus springs, nuclear potential,
cavity term expanded into its dipole-dipole blocks) and then minimized,
differentiated or diagonalized with dense linear algebra. None of the
closed forms from :mod:`harmonic_vsc.model` are used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ApproximationLevel, EnsembleConfig

MAX_MOLECULES = 50


class IndefiniteModelError(ValueError):
    """A block that must be positive definite has a non-positive eigenvalue."""

    def __init__(self, message: str, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"{message} (min eigenvalue {min_eigenvalue:.6g})")


@dataclass
class QuadraticModel:
    """``U(z) = 1/2 z.K.z - b.z + c`` with per-coordinate masses."""

    labels: list
    masses: np.ndarray
    stiffness: np.ndarray
    linear: np.ndarray
    offset: float
    n_molecules: int
    nuclei_per_molecule: int
    level: ApproximationLevel

    @property
    def electrons(self) -> slice:
        return slice(0, self.n_molecules)

    @property
    def nuclei(self) -> slice:
        return slice(self.n_molecules, self.n_molecules * (1 + self.nuclei_per_molecule))

    @property
    def photon(self) -> int:
        return self.stiffness.shape[0] - 1

    @property
    def slow(self) -> np.ndarray:
        """Indices of nuclei followed by the photon."""
        return np.arange(self.n_molecules, self.stiffness.shape[0])

    def energy(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.stiffness @ z - self.linear @ z + self.offset)

    def pack(self, r, positions, q_beta) -> np.ndarray:
        return np.concatenate([np.ravel(r), np.ravel(positions), [q_beta]])


def build_quadratic(config: EnsembleConfig, level=None, external_field=None,
                    electron_mass: float = 1.0) -> QuadraticModel:
    """Assemble the full quadratic potential for the requested level.

    ``external_field`` (scalar or one entry per molecule) adds ``-Z_e E_i r_i``.
    Level be drops every electron-photon and electron self-energy block
    (electrons stay bare); level D drops all squared-dipole blocks and keeps
    only ``-omega q (X + x)``.
    """
    level = config.level if level is None else ApproximationLevel.parse(level)
    n = config.n_molecules
    nn = config.nuclei_per_molecule
    if n > MAX_MOLECULES:
        raise ValueError(f"oracle is limited to {MAX_MOLECULES} molecules (dense algebra), got {n}")
    dim = n + n * nn + 1
    K = np.zeros((dim, dim))
    b = np.zeros(dim)

    def e(i):
        return i

    def nuc(i, m):
        return n + i * nn + m

    ph = dim - 1
    k_e = config.k_e
    for i in range(n):
        # k_e/2 (R_in - r_i)^2
        for m in range(nn):
            a, c = nuc(i, m), e(i)
            K[a, a] += k_e
            K[c, c] += k_e
            K[a, c] -= k_e
            K[c, a] -= k_e
        # V_i = W_i - k_e/2 (sum R^2 - (sum R)^2 / N_n)
        for m in range(nn):
            K[nuc(i, m), nuc(i, m)] -= k_e
            for m2 in range(nn):
                K[nuc(i, m), nuc(i, m2)] += k_e / nn
        if config.nuclear_potential == "chain":
            for m in range(nn - 1):
                a, c = nuc(i, m), nuc(i, m + 1)
                K[a, a] += config.k_n
                K[c, c] += config.k_n
                K[a, c] -= config.k_n
                K[c, a] -= config.k_n

    lam, w, ze = config.lam, config.omega_beta, config.electron_charge
    # omega q - X - x as a linear form
    cav = np.zeros(dim)
    cav[ph] = w
    for i in range(n):
        cav[e(i)] = lam * ze
        for m in range(nn):
            cav[nuc(i, m)] = -lam * config.nuclear_charges[m]

    if level is ApproximationLevel.SC:
        K += np.outer(cav, cav)
    elif level is ApproximationLevel.BE:
        matter = cav.copy()
        matter[:n] = 0.0
        K += np.outer(matter, matter)
    else:
        # 1/2 w^2 q^2 - w q (X + x); (X + x) = -(cav - w e_q)
        dip = -(cav.copy())
        dip[ph] = 0.0
        K[ph, ph] += w * w
        K[ph, :] -= w * dip
        K[:, ph] -= w * dip

    if external_field is not None:
        fields = np.broadcast_to(np.asarray(external_field, dtype=float), (n,))
        b[:n] += ze * fields

    labels = [f"r{i}" for i in range(n)] + [f"R{i},{m}" for i in range(n) for m in range(nn)] + ["q"]
    masses = np.concatenate([np.full(n, electron_mass), np.tile(config.masses, n), [1.0]])
    return QuadraticModel(labels, masses, K, b, 0.0, n, nn, level)


@dataclass(frozen=True)
class ElectronMinimum:
    r: np.ndarray
    energy: float
    classical_energy: float
    zero_point: float


def electronic_minimize(model: QuadraticModel, positions, q_beta: float,
                        zero_point: str = "hartree") -> ElectronMinimum:
    """Minimize over electron coordinates at fixed nuclei and photon.

    ``energy`` is measured relative to ``U`` with the electrons at the origin
    (only the electron-dependent part of the potential) plus a zero-point
    term. ``zero_point="hartree"`` uses one oscillator per electron with the
    diagonal stiffness; ``"exact"`` uses the eigenvalues of the coupled block.
    """
    es = model.electrons
    K = model.stiffness
    kee = K[es, es]
    eig = np.linalg.eigvalsh(kee)
    if eig[0] <= 0:
        raise IndefiniteModelError("electronic block is not positive definite", eig[0])
    y = np.concatenate([np.ravel(positions), [q_beta]])
    slow = model.slow
    rhs = model.linear[es] - K[es][:, slow] @ y
    r = np.linalg.solve(kee, rhs)
    classical = 0.5 * r @ kee @ r + r @ (K[es][:, slow] @ y) - model.linear[es] @ r
    m_e = model.masses[es]
    if zero_point == "hartree":
        zpe = 0.5 * float(np.sum(np.sqrt(np.diag(kee) / m_e)))
    elif zero_point == "exact":
        mw = kee / np.sqrt(np.outer(m_e, m_e))
        zpe = 0.5 * float(np.sum(np.sqrt(np.linalg.eigvalsh(mw))))
    else:
        raise ValueError("zero_point must be 'hartree' or 'exact'")
    return ElectronMinimum(r, float(classical + zpe), float(classical), zpe)


def born_oppenheimer_energy(model: QuadraticModel, positions, q_beta: float) -> float:
    """Full potential with the electrons relaxed (no zero-point term)."""
    mini = electronic_minimize(model, positions, q_beta)
    z = model.pack(mini.r, positions, q_beta)
    return model.energy(z)


def effective_stiffness(model: QuadraticModel) -> np.ndarray:
    """Schur complement of the electron block: the nuclear+photon stiffness."""
    es = model.electrons
    slow = model.slow
    K = model.stiffness
    kee = K[es, es]
    eig = np.linalg.eigvalsh(kee)
    if eig[0] <= 0:
        raise IndefiniteModelError("electronic block is not positive definite", eig[0])
    kes = K[es][:, slow]
    return K[np.ix_(slow, slow)] - kes.T @ np.linalg.solve(kee, kes)


def born_oppenheimer_forces(model: QuadraticModel, positions, q_beta: float) -> tuple:
    """``-dU_BO/d(R, q)`` from the relaxed-electron surface (exact for quadratic U)."""
    y = np.concatenate([np.ravel(positions), [q_beta]])
    es = model.electrons
    slow = model.slow
    K = model.stiffness
    kee = K[es, es]
    kes = K[es][:, slow]
    b_e = model.linear[es]
    r = np.linalg.solve(kee, b_e - kes @ y)
    z = np.concatenate([r, y])
    grad = K[slow] @ z - model.linear[slow]
    f = -grad
    pos = np.asarray(positions)
    return f[:-1].reshape(pos.shape), float(f[-1])


def frozen_electron_forces(model: QuadraticModel, r, positions, q_beta: float) -> tuple:
    """Partial forces at prescribed electron positions (no relaxation)."""
    z = model.pack(r, positions, q_beta)
    grad = model.stiffness @ z - model.linear
    slow = model.slow
    f = -grad[slow]
    pos = np.asarray(positions)
    return f[:-1].reshape(pos.shape), float(f[-1])


def finite_difference_forces(model: QuadraticModel, positions, q_beta: float, step: float = 1e-5
                             ) -> tuple:
    """Central differences of the relaxed-electron energy."""
    pos = np.array(positions, dtype=float)
    f = np.zeros_like(pos)
    for idx in np.ndindex(pos.shape):
        plus, minus = pos.copy(), pos.copy()
        plus[idx] += step
        minus[idx] -= step
        f[idx] = -(born_oppenheimer_energy(model, plus, q_beta)
                   - born_oppenheimer_energy(model, minus, q_beta)) / (2 * step)
    fq = -(born_oppenheimer_energy(model, pos, q_beta + step)
           - born_oppenheimer_energy(model, pos, q_beta - step)) / (2 * step)
    return f, float(fq)


@dataclass(frozen=True)
class ModeSpectrum:
    frequencies: np.ndarray
    eigenvalues: np.ndarray
    unstable: bool


def _mass_weighted_frequencies(K: np.ndarray, masses: np.ndarray, zero_tol: float) -> ModeSpectrum:
    mw = K / np.sqrt(np.outer(masses, masses))
    mw = 0.5 * (mw + mw.T)
    eig = np.linalg.eigvalsh(mw)
    scale = max(np.max(np.abs(eig)), 1e-300)
    unstable = bool(eig[0] < -zero_tol * scale)
    freqs = np.sqrt(np.clip(eig, 0.0, None))
    freqs[np.abs(eig) <= zero_tol * scale] = 0.0
    return ModeSpectrum(freqs, eig, unstable)


def full_normal_modes(model: QuadraticModel, eliminate_electrons: bool = True,
                      clamp_nuclei: bool = False, zero_tol: float = 1e-11) -> ModeSpectrum:
    """Harmonic frequencies of the quadratic model.

    With ``eliminate_electrons`` the electrons follow adiabatically (Schur
    complement), which is what the cavity Born-Oppenheimer dynamics sees.
    ``clamp_nuclei`` additionally keeps only the photon row. Negative
    eigenvalues are flagged through ``unstable`` rather than returning NaN.
    """
    if eliminate_electrons:
        K = effective_stiffness(model)
        masses = model.masses[model.slow]
        if clamp_nuclei:
            K = K[-1:, -1:]
            masses = masses[-1:]
    else:
        K = model.stiffness
        masses = model.masses
        if clamp_nuclei:
            keep = np.r_[np.arange(model.n_molecules), model.photon]
            K = K[np.ix_(keep, keep)]
            masses = masses[keep]
    return _mass_weighted_frequencies(K, masses, zero_tol)


def _perturbation_vector(model: QuadraticModel, scope: str, j: int) -> np.ndarray:
    n = model.n_molecules
    fields = np.zeros(n)
    if scope == "ensemble":
        fields[:] = 1.0
    elif scope == "local":
        fields[j] = 1.0
    else:
        raise ValueError("scope must be 'ensemble' or 'local'")
    return fields


def static_response(config: EnsembleConfig, perturbation: str, observable: str, i: int = 0,
                    j: int = 0, method: str = "linear", step: float = 1e-4,
                    positions=None, q_beta: float = 0.0, level=None) -> float:
    """Derivative of an electronic dipole with respect to a static field.

    ``perturbation`` / ``observable`` are ``"ensemble"`` or ``"local"``
    (molecule ``j`` perturbed, molecule ``i`` observed; 0-based). The dipole is
    ``Z_e sum r``. ``method="linear"`` solves the response equations directly,
    ``"finite_difference"`` re-minimizes at ``+-step`` (central difference).
    """
    base = build_quadratic(config, level)
    n = config.n_molecules
    if positions is None:
        positions = np.zeros((n, config.nuclei_per_molecule))
    fields = _perturbation_vector(base, perturbation, j)
    ze = config.electron_charge

    def dipole(r):
        return ze * (r.sum() if observable == "ensemble" else r[i])

    if observable not in ("ensemble", "local"):
        raise ValueError("observable must be 'ensemble' or 'local'")
    if method == "linear":
        kee = base.stiffness[base.electrons, base.electrons]
        dr = np.linalg.solve(kee, ze * fields)
        return float(dipole(dr))
    if method == "finite_difference":
        plus = build_quadratic(config, level, external_field=step * fields)
        minus = build_quadratic(config, level, external_field=-step * fields)
        rp = electronic_minimize(plus, positions, q_beta).r
        rm = electronic_minimize(minus, positions, q_beta).r
        return float((dipole(rp) - dipole(rm)) / (2 * step))
    raise ValueError("method must be 'linear' or 'finite_difference'")


def richardson_response(config: EnsembleConfig, perturbation: str, observable: str, i: int = 0,
                        j: int = 0, step: float = 1e-4, **kw) -> tuple:
    """Finite-difference response at ``step`` and ``step/2`` plus the extrapolation."""
    a = static_response(config, perturbation, observable, i, j, "finite_difference", step, **kw)
    b = static_response(config, perturbation, observable, i, j, "finite_difference", step / 2, **kw)
    return a, b, (4 * b - a) / 3


def sum_over_states_polarizability(config: EnsembleConfig, basis_size: int = 60,
                                   positions=None, q_beta: float = 0.0) -> float:
    """Second-order perturbative polarizability of molecule 1 from explicit states.

    The single electron's mean-field Hamiltonian (its diagonal stiffness and
    linear term from the quadratic model) is diagonalized in a truncated
    harmonic-oscillator basis; the standard sum over excited states is then
    evaluated numerically. For ``N = 1`` this is the exact quantum problem.
    """
    model = build_quadratic(config)
    n = config.n_molecules
    if positions is None:
        positions = np.zeros((n, config.nuclei_per_molecule))
    mini = electronic_minimize(model, positions, q_beta)
    K = model.stiffness
    k11 = K[0, 0]
    # linear coefficient felt by electron 1 with the others frozen at their means
    y = np.concatenate([mini.r, np.ravel(positions), [q_beta]])
    lin = K[0] @ y - k11 * y[0] - model.linear[0]
    nu = np.sqrt(k11)
    idx = np.arange(basis_size)
    off = np.sqrt(idx[1:] / (2 * nu))
    r_op = np.diag(off, 1) + np.diag(off, -1)
    h = np.diag(nu * (idx + 0.5)) + lin * r_op
    evals, evecs = np.linalg.eigh(h)
    r_elements = evecs.T @ r_op @ evecs
    ze = config.electron_charge
    ex = slice(1, basis_size // 2)
    return float(2 * ze**2 * np.sum(r_elements[0, ex] ** 2 / (evals[ex] - evals[0])))
