"""
Shared pytest fixtures
Seeded generators and the standard layer sets used across the test scripts
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add package root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from birb.circuits.circuit import GateSetSpec  # noqa: E402
from birb.sampler.omega import OmegaSpec  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo checks that take more than a few seconds")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def gate_set():
    """XPI2/YPI2 with CNOT on all-to-all connectivity"""
    return GateSetSpec()


@pytest.fixture
def omega():
    return OmegaSpec(xi=0.5)


@pytest.fixture
def line_omega():
    return OmegaSpec(xi=0.5, connectivity="line")


@pytest.fixture
def single_qubit_omega():
    """Enumerable n=1 layer set that generates the single-qubit Clifford group"""
    return OmegaSpec(xi=0.0, gate_set=["I", "XPI2", "YPI2"])
