"""Classical cavity Born-Oppenheimer dynamics of nuclei and the photon coordinate.

Forces follow from the Hellmann-Feynman theorem with the dressed electrons of
:mod:`harmonic_vsc.model`. Propagation uses a one-step Langevin scheme: an
exact Ornstein-Uhlenbeck half step on the momenta on both sides of a
velocity-Verlet core (OBABO). With zero friction no random numbers are drawn
and the step is plain velocity Verlet.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cavity import check_displacement_stable
from .model import (
    ApproximationLevel,
    EnsembleConfig,
    SystemState,
    dressed_expectations,
    potential_energy_w,
    potential_gradient,
    screened_dipole,
    solve_dressed_electrons,
)

PHOTON_MASS = 1.0
DEFAULT_BLOWUP_BOUND = 1e6


class TrajectoryBlowUpError(RuntimeError):
    """A coordinate left the configured bound during propagation."""

    def __init__(self, step: int, coordinate: str, value: float, bound: float):
        self.step = step
        self.coordinate = coordinate
        self.value = value
        self.bound = bound
        super().__init__(f"trajectory blew up at step {step}: |{coordinate}| = {abs(value):.3g} "
                         f"exceeds {bound:.3g} a.u.")


@dataclass(frozen=True)
class ThermostatParams:
    """Langevin parameters in atomic units.

    ``photon_friction=None`` thermostats the photon coordinate with the same
    friction as the nuclei.
    """

    temperature: float = 1e-3
    friction: float = 0.5e-5
    dt: float = 20.0
    rng_seed: int = 0
    photon_friction: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.friction < 0:
            raise ValueError("friction must be non-negative")
        if self.photon_friction is not None and self.photon_friction < 0:
            raise ValueError("photon_friction must be non-negative")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")

    @property
    def photon_gamma(self) -> float:
        return self.friction if self.photon_friction is None else self.photon_friction

    @property
    def is_nve(self) -> bool:
        return self.friction == 0 and self.photon_gamma == 0


def verlet_frequency(omega, dt: float):
    """Frequency at which velocity Verlet oscillates a harmonic mode of frequency ``omega``.

    The discrete propagator rotates by ``2 arcsin(omega dt / 2)`` per step, so
    sampled trajectories show a slight blue shift of ``~omega^3 dt^2 / 24``.
    Requires ``omega dt < 2`` (stability limit).
    """
    x = 0.5 * np.asarray(omega, dtype=float) * dt
    if np.any(x >= 1):
        raise ValueError("omega * dt must be below 2 for a stable Verlet step")
    return 2.0 / dt * np.arcsin(x)


def _forces_from_expectations(config: EnsembleConfig, positions: np.ndarray, q_beta: float,
                              r: np.ndarray, x: float, e_perp: float, level: ApproximationLevel
                              ) -> tuple:
    nn = config.nuclei_per_molecule
    electron_pull = config.k_e * (r - positions.sum(axis=1) / nn)
    nuclear = -potential_gradient(config, positions) + electron_pull[:, None]
    nuclear = nuclear + config.charges * e_perp
    w = config.omega_beta
    X = config.lam * float(np.sum(positions @ config.charges))
    if level is ApproximationLevel.D:
        photon = -w * w * q_beta + w * (X + x)
    else:
        photon = -w * (w * q_beta - X - x)
    return nuclear, float(photon)


def forces(config: EnsembleConfig, state: SystemState, level=None) -> tuple:
    """Hellmann-Feynman forces ``(nuclear (N, N_n), photon)`` at the given level.

    Nuclei feel the intra-molecular potential, the pull of their dressed
    electron and ``Z_n E_perp``; at level D the field is only the
    displacement part. The photon force is ``-omega (omega q - X - <x>)``
    (sc, be) or ``-omega^2 q + omega (X + <x>)`` (D).
    """
    level = config.level if level is None else ApproximationLevel.parse(level)
    sol = solve_dressed_electrons(config, state, level)
    return _forces_from_expectations(config, state.positions, state.q_beta, sol.r_expect,
                                     sol.x_expect, sol.e_perp, level)


def potential_energy(config: EnsembleConfig, state: SystemState, level=None) -> float:
    """Born-Oppenheimer potential for nuclei and photon, up to a constant.

    Defined for sc and D without external fields. Level be forces have no
    potential (their Jacobian is not symmetric).
    """
    level = config.level if level is None else ApproximationLevel.parse(level)
    if state.external_field is not None and np.any(state.field_per_molecule(config.n_molecules)):
        raise ValueError("potential_energy does not include external-field terms")
    w = config.omega_beta
    q = state.q_beta
    xp = screened_dipole(config, state.positions)
    base = potential_energy_w(config, state.positions)
    if level is ApproximationLevel.SC:
        return base + 0.5 * config.gamma2 * (w * q - xp) ** 2
    if level is ApproximationLevel.D:
        return base + 0.5 * (2.0 - 1.0 / config.gamma2) * (w * q) ** 2 - w * q * xp
    raise ValueError("level be has non-conservative forces and no potential energy")


def kinetic_energy(config: EnsembleConfig, state: SystemState) -> float:
    nuc = 0.5 * float(np.sum(state.momenta**2 / config.masses))
    return nuc + 0.5 * state.p_beta**2 / PHOTON_MASS


def total_energy(config: EnsembleConfig, state: SystemState, level=None) -> float:
    return kinetic_energy(config, state) + potential_energy(config, state, level)


def random_initial_state(config: EnsembleConfig, rng: np.random.Generator, radius: float = 0.1,
                         q_beta: float = 0.0) -> SystemState:
    """Nuclei displaced uniformly within ``+-radius`` of the origin, all momenta zero."""
    shape = (config.n_molecules, config.nuclei_per_molecule)
    pos = rng.uniform(-radius, radius, size=shape)
    return SystemState(pos, np.zeros(shape), q_beta=q_beta, p_beta=0.0)


class LangevinIntegrator:
    """OBABO propagator holding its random stream and the cached forces."""

    def __init__(self, config: EnsembleConfig, thermostat: ThermostatParams, level=None,
                 rng: Optional[np.random.Generator] = None):
        self.config = config
        self.thermostat = thermostat
        self.level = config.level if level is None else ApproximationLevel.parse(level)
        if self.level is ApproximationLevel.D:
            check_displacement_stable(config)
        self.rng = np.random.default_rng(thermostat.rng_seed) if rng is None else rng
        self.masses = np.broadcast_to(config.masses, (config.n_molecules, config.nuclei_per_molecule))
        dt = thermostat.dt
        kt = thermostat.temperature
        self._c_nuc = np.exp(-0.5 * thermostat.friction * dt)
        self._c_ph = np.exp(-0.5 * thermostat.photon_gamma * dt)
        self._s_nuc = np.sqrt((1.0 - self._c_nuc**2) * self.masses * kt)
        self._s_ph = np.sqrt((1.0 - self._c_ph**2) * PHOTON_MASS * kt)
        self._noisy = not (thermostat.is_nve or kt == 0)
        self._cache = None

    def evaluate(self, state: SystemState) -> tuple:
        ext = None
        if state.external_field is not None:
            ext = state.field_per_molecule(self.config.n_molecules)
        r, x, e_perp = dressed_expectations(self.config, state.positions, state.q_beta, ext, self.level)
        f_nuc, f_ph = _forces_from_expectations(self.config, state.positions, state.q_beta, r, x,
                                                e_perp, self.level)
        return f_nuc, f_ph, r, x, e_perp

    def _ou(self, state: SystemState) -> None:
        if not self._noisy:
            if self._c_nuc != 1.0:
                state.momenta *= self._c_nuc
            if self._c_ph != 1.0:
                state.p_beta *= self._c_ph
            return
        noise = self.rng.standard_normal(state.momenta.size + 1)
        state.momenta = self._c_nuc * state.momenta + self._s_nuc * noise[:-1].reshape(state.momenta.shape)
        state.p_beta = self._c_ph * state.p_beta + self._s_ph * noise[-1]

    def step(self, state: SystemState) -> SystemState:
        """Advance ``state`` in place by one time step and return it."""
        dt = self.thermostat.dt
        if self._cache is None:
            self._cache = self.evaluate(state)
        f_nuc, f_ph = self._cache[0], self._cache[1]
        self._ou(state)
        state.momenta = state.momenta + 0.5 * dt * f_nuc
        state.p_beta = state.p_beta + 0.5 * dt * f_ph
        state.positions = state.positions + dt * state.momenta / self.masses
        state.q_beta = state.q_beta + dt * state.p_beta / PHOTON_MASS
        self._cache = self.evaluate(state)
        f_nuc, f_ph = self._cache[0], self._cache[1]
        state.momenta = state.momenta + 0.5 * dt * f_nuc
        state.p_beta = state.p_beta + 0.5 * dt * f_ph
        self._ou(state)
        return state

    @property
    def last_evaluation(self):
        return self._cache


def langevin_step(config: EnsembleConfig, state: SystemState, thermostat: ThermostatParams,
                  rng: Optional[np.random.Generator] = None, level=None) -> SystemState:
    """One OBABO step on a copy of ``state``.

    ``rng`` defaults to a fresh generator seeded from ``thermostat.rng_seed``;
    pass a generator explicitly to continue one random stream across steps.
    """
    integrator = LangevinIntegrator(config, thermostat, level, rng)
    return integrator.step(state.copy())


@dataclass
class Trajectory:
    """Sampled observables; row ``k`` belongs to MD step ``steps[k]``."""

    dt: float
    stride: int
    steps: np.ndarray
    q_beta: np.ndarray
    collective_dipole: np.ndarray
    local_dipoles: np.ndarray
    bond_lengths: np.ndarray
    kinetic_energy: np.ndarray
    e_perp: np.ndarray
    positions: Optional[np.ndarray] = None
    final_state: Optional[SystemState] = None
    metadata: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.steps * self.dt

    @property
    def sample_dt(self) -> float:
        return self.dt * self.stride

    def __len__(self) -> int:
        return len(self.steps)


def propagate(config: EnsembleConfig, thermostat: ThermostatParams, n_steps: int,
              sample_stride: int = 1, initial_state: Optional[SystemState] = None, level=None,
              blowup_bound: float = DEFAULT_BLOWUP_BOUND, store_positions: bool = False,
              rng: Optional[np.random.Generator] = None) -> Trajectory:
    """Run ``n_steps`` steps and sample observables every ``sample_stride`` steps.

    Sample 0 is the initial state. The collective dipole is ``(X + <x>)/lam``
    written without the coupling factor, ``sum_i d_i``, so it is defined at
    ``lam = 0`` too. The bond length is ``R_i2 - R_i1`` of every molecule.
    Without ``initial_state`` the nuclei start randomly near equilibrium
    using the thermostat's random stream.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if sample_stride < 1:
        raise ValueError("sample_stride must be >= 1")
    integrator = LangevinIntegrator(config, thermostat, level, rng)
    if initial_state is None:
        state = random_initial_state(config, integrator.rng)
    else:
        initial_state.check(config)
        state = initial_state.copy()
    n_samples = n_steps // sample_stride + 1
    n, nn = config.n_molecules, config.nuclei_per_molecule
    steps = np.arange(n_samples) * sample_stride
    q_arr = np.empty(n_samples)
    coll = np.empty(n_samples)
    local = np.empty((n_samples, n))
    bond = np.empty((n_samples, n))
    kin = np.empty(n_samples)
    ep = np.empty(n_samples)
    pos_arr = np.empty((n_samples, n, nn)) if store_positions else None
    charges = config.charges
    ze = config.electron_charge

    def record(k, st, cache):
        r, e_perp = cache[2], cache[4]
        d = st.positions @ charges - ze * r
        local[k] = d
        coll[k] = float(d.sum())
        q_arr[k] = st.q_beta
        bond[k] = st.positions[:, 1] - st.positions[:, 0] if nn > 1 else st.positions[:, 0]
        kin[k] = kinetic_energy(config, st)
        ep[k] = e_perp
        if pos_arr is not None:
            pos_arr[k] = st.positions

    integrator._cache = integrator.evaluate(state)
    record(0, state, integrator._cache)
    k = 1
    for step in range(1, n_steps + 1):
        integrator.step(state)
        if step % sample_stride == 0:
            _check_bound(state, step, blowup_bound)
            record(k, state, integrator._cache)
            k += 1
    _check_bound(state, n_steps, blowup_bound)
    return Trajectory(
        dt=thermostat.dt, stride=sample_stride, steps=steps, q_beta=q_arr, collective_dipole=coll,
        local_dipoles=local, bond_lengths=bond, kinetic_energy=kin, e_perp=ep, positions=pos_arr,
        final_state=state, metadata={"level": integrator.level.value, "n_molecules": n},
    )


def run_trajectories(config: EnsembleConfig, thermostat: ThermostatParams, n_steps: int,
                     sample_stride: int = 1, n_seeds: int = 4, level=None, **kwargs) -> list:
    """Independent trajectories with streams spawned from ``thermostat.rng_seed``, in seed order."""
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    children = np.random.SeedSequence(int(thermostat.rng_seed)).spawn(n_seeds)
    return [propagate(config, thermostat, n_steps, sample_stride, level=level,
                      rng=np.random.default_rng(child), **kwargs) for child in children]


def _check_bound(state: SystemState, step: int, bound: float) -> None:
    checks = (("R", state.positions), ("P", state.momenta), ("q_beta", state.q_beta),
              ("p_beta", state.p_beta))
    for name, value in checks:
        arr = np.asarray(value)
        if not np.all(np.isfinite(arr)):
            raise TrajectoryBlowUpError(step, name, float("inf"), bound)
        peak = float(np.max(np.abs(arr)))
        if peak > bound:
            raise TrajectoryBlowUpError(step, name, peak, bound)


def energy_drift(config: EnsembleConfig, thermostat: ThermostatParams, n_steps: int,
                 initial_state: SystemState, level=None) -> dict:
    """Secular total-energy drift of a deterministic run.

    Returns the relative drift ``slope * duration / |<E>|`` from a linear
    least-squares fit and the relative peak-to-peak oscillation. Velocity
    Verlet conserves a shadow energy exactly for harmonic systems, so the
    true energy oscillates at ``O((omega dt)^2)`` without a secular trend.
    """
    if not thermostat.is_nve:
        raise ValueError("energy drift is only meaningful with zero friction")
    integrator = LangevinIntegrator(config, thermostat, level)
    state = initial_state.copy()
    energies = np.empty(n_steps + 1)
    energies[0] = total_energy(config, state, integrator.level)
    for step in range(1, n_steps + 1):
        integrator.step(state)
        energies[step] = total_energy(config, state, integrator.level)
    t = np.arange(n_steps + 1) * thermostat.dt
    slope, _ = np.polyfit(t, energies, 1)
    scale = abs(float(np.mean(energies)))
    return {
        "relative_drift": abs(slope) * t[-1] / scale,
        "relative_oscillation": float(np.ptp(energies)) / scale,
        "energies": energies,
    }


def mean_kinetic_energy_per_dof(traj: Trajectory, config: EnsembleConfig, discard_fraction: float = 0.2
                                ) -> float:
    """Time average of the total kinetic energy divided by the number of momenta."""
    start = int(np.ceil(discard_fraction * len(traj)))
    n_dof = config.n_molecules * config.nuclei_per_molecule + 1
    return float(np.mean(traj.kinetic_energy[start:])) / n_dof


def write_trajectory_csv(path, traj: Trajectory, header: dict) -> None:
    """CSV rows ``step, q_beta, collective_dipole, local_dipole_1, bond_length_1, kinetic_energy``."""
    lines = [f"# {key}: {value}" for key, value in header.items()]
    lines.append(f"# dt: {traj.dt!r}")
    lines.append(f"# stride: {traj.stride}")
    lines.append("step,q_beta,collective_dipole,local_dipole_1,bond_length_1,kinetic_energy")
    for k in range(len(traj)):
        row = (traj.q_beta[k], traj.collective_dipole[k], traj.local_dipoles[k, 0], traj.bond_lengths[k, 0],
               traj.kinetic_energy[k])
        lines.append(f"{int(traj.steps[k])}," + ",".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> tuple:
    """Return ``(header dict, column dict)`` from :func:`write_trajectory_csv` output."""
    header = {}
    rows = []
    names = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                header[key.strip()] = value.strip()
            elif names is None:
                names = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    if names is None:
        raise ValueError(f"{path}: no column header found")
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return header, {name: data[:, i] for i, name in enumerate(names)}
