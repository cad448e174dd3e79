import numpy as np
import pytest

from harmonic_vsc.co2 import CO2Preset
from harmonic_vsc.model import EnsembleConfig, SystemState

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def co2():
    return CO2Preset()


@pytest.fixture
def generic_config():
    """Non-neutral three-nucleus molecule with distinct masses and charges."""
    return EnsembleConfig(n_molecules=3, nuclear_masses=(1.0, 2.0, 3.0), nuclear_charges=(0.7, 1.3, 0.2),
                          electron_charge=2.5, k_e=0.8, lam=0.3, omega_beta=0.7, k_n=0.4)


def random_state(config, rng, q_beta=None):
    shape = (config.n_molecules, config.nuclei_per_molecule)
    q = float(rng.normal()) if q_beta is None else q_beta
    return SystemState(rng.normal(size=shape), rng.normal(size=shape), q_beta=q, p_beta=float(rng.normal()))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
