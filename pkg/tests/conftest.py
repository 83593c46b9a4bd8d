import sys
from pathlib import Path

import numpy as np
import pytest

_root = Path(__file__).resolve().parent.parent
if str(_root) not in sys.path:
    sys.path.insert(0, str(_root))

from utils.dynamics import ParticleParams, ParticleState
from utils.minkowski import field_from_eb, velocity_from_beta
from utils.spin import state_spin_from_zeta

SCENARIOS = _root / "scenarios"


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def params():
    return ParticleParams(m0=1.0, e=1.0, g=2.002, hbar=1e-3, c=1.0)


def random_unit(rng) -> np.ndarray:
    x = rng.normal(size=3)
    return x / np.linalg.norm(x)


def random_beta(rng, max_speed: float = 0.9) -> np.ndarray:
    return random_unit(rng) * rng.uniform(0.0, max_speed)


@pytest.fixture
def random_state(rng):
    """Factory for on-shell, Frenkel-consistent states: state, uniform field tensor."""

    def make(params: ParticleParams, max_speed: float = 0.9, position=None):
        beta = random_beta(rng, max_speed)
        zeta = random_unit(rng) * rng.uniform(0.2, 1.0)
        r = np.concatenate([[0.0], rng.uniform(-1.0, 1.0, size=3) if position is None else position])
        state = ParticleState(
            tau=0.0,
            r=r,
            v=velocity_from_beta(beta, params.c),
            Pi=state_spin_from_zeta(zeta, beta),
        )
        H = field_from_eb(rng.uniform(-1.0, 1.0, size=3), rng.uniform(-1.0, 1.0, size=3))
        return state, H

    return make


@pytest.fixture
def scenario_file():
    def path(name: str) -> Path:
        return SCENARIOS / f"{name}.yaml"

    return path
