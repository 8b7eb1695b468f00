from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mrrr import SolverConfig, Tridiagonal, mixed32in64, standard64

settings.register_profile(
    "frozen",
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("frozen")

EPS = 2.0**-53


@pytest.fixture
def std_cfg() -> SolverConfig:
    return SolverConfig(profile=standard64())


@pytest.fixture
def mixed_cfg():
    def make(n: int) -> SolverConfig:
        return SolverConfig(profile=mixed32in64(n))

    return make


def one21(n: int) -> Tridiagonal:
    return Tridiagonal(np.full(n, 2.0), np.ones(n - 1))
