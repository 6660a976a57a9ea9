import functools
import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from icnash import PRESETS, GameSpec, Info  # noqa: E402

settings.register_profile("icnash", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("icnash")


@functools.lru_cache(maxsize=None)
def preset_game(name: str, snr_db: float, info: str) -> GameSpec:
    """Cached preset games; the kernels never mutate them."""
    return GameSpec.from_snr(PRESETS[name], snr_db, Info(info))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
