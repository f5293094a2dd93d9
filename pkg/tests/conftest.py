import numpy as np
import pytest

from snowsca.leakage import RANDOM, Granularity, LeakageModel, simulate_trace_set
from snowsca.snowv import Iv128, Key256

# k_0 = 0x5a16: the low byte of A[8] is 0x16.
KEY_HEX = '165a3bc4e1097f2d88a06b13c5f2d47e0c9b1e65a7f0423d59c8b6e1047af32c'
IV_HEX = '0f1e2d3c4b5a69788796a5b4c3d2e1f0'


@pytest.fixture(scope='session')
def key() -> Key256:
    return Key256.from_hex(KEY_HEX)


@pytest.fixture(scope='session')
def iv() -> Iv128:
    return Iv128.from_hex(IV_HEX)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope='session')
def noiseless() -> LeakageModel:
    return LeakageModel(noise_sigma=0.0)


@pytest.fixture(scope='session')
def word_model() -> LeakageModel:
    return LeakageModel(noise_sigma=0.0, granularity=Granularity.WORD)


@pytest.fixture(scope='session')
def attack_set(key):
    """Default model, fixed key, random IVs."""
    return simulate_trace_set(key, RANDOM, 400, master_seed=11)


@pytest.fixture(scope='session')
def profile_set():
    """Default model, random key and IV per trace."""
    return simulate_trace_set(RANDOM, RANDOM, 200, master_seed=12)


@pytest.fixture(scope='session')
def test_set():
    """Held-out set with random keys."""
    return simulate_trace_set(RANDOM, RANDOM, 500, master_seed=13)
