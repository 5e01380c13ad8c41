import numpy as np
import pytest

from sepsim.magnetics import (PRESET_DATASHEET, PRESET_TABLE1, SolverConfig,
                              centered, demagnetized_rod)

BENCH_RADIUS = 1.5e-3
BENCH_LENGTH = 8.0e-3


@pytest.fixture
def table1():
    return PRESET_TABLE1


@pytest.fixture
def datasheet():
    return PRESET_DATASHEET


@pytest.fixture
def cfg():
    return SolverConfig()


@pytest.fixture
def fine_cfg():
    """Oracle config: 100x finer field sub-steps, 4x finer sampling."""
    return SolverConfig(time_step=1.25e-7, dh_max_fraction=1.0 / 5000.0)


@pytest.fixture
def exact_coil():
    return centered(250, BENCH_LENGTH, BENCH_RADIUS, 0.2e-3)


@pytest.fixture
def fresh_rod(table1):
    return demagnetized_rod(table1, BENCH_RADIUS, BENCH_LENGTH)


@pytest.fixture
def rng():
    return np.random.default_rng(20230817)
