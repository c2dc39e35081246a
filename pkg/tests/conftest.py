from __future__ import annotations

import numpy as np
import pytest

from strongtherm.spinboson import ModelConfig


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def fig1_cfg():
    return ModelConfig(beta=1.0)


@pytest.fixture
def short_grid():
    # resolves the coherent exchange (period ~ 3.5) over a few relaxation times
    return np.linspace(0.0, 400.0, 1601)
