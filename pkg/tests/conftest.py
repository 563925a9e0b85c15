# -*- encoding: utf-8 -*-

"""
Shared Fixtures of the Test Suite

Scenarios are small and seeded, so every test is deterministic. Tests
marked ``slow`` run the command line end to end or repeat a check over
many seeded instances (Monte-Carlo runs), they can be skipped
with ``pytest -m "not slow"``.
"""

import numpy as np
import pytest

from linslam.core.state import PoseFrame
from linslam.localmap import build_local_map
from linslam.sim import ScenarioConfig, generate

def pytest_configure(config) -> None:
    config.addinivalue_line("markers", "slow: end to end runs of the command line and seeded Monte-Carlo checks")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope = "session")
def exact_scenario() -> tuple:
    """Noise free planar loop, the local maps agree exactly with the truth"""

    cfg = ScenarioConfig(poses = 21, chunk_size = 5, seed = 11, noise = False, feature_density = 0.15)
    truth, chunks = generate(cfg)
    maps = [build_local_map(chunk, PoseFrame(chunk.poses[0])) for chunk in chunks]
    return truth, chunks, maps


@pytest.fixture(scope = "session")
def noisy_scenario() -> tuple:
    cfg = ScenarioConfig(poses = 21, chunk_size = 5, seed = 5, feature_density = 0.15)
    truth, chunks = generate(cfg)
    maps = [build_local_map(chunk, PoseFrame(chunk.poses[0])) for chunk in chunks]
    return truth, chunks, maps
