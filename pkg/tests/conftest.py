from pathlib import Path

import numpy as np
import pytest

from boxprewavelets.boxspline import get_preset
from boxprewavelets.prewavelet import PrewaveletConstruction

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def verified_family():
    """Fully verified preset families, built once per session."""
    cache = {}

    def build(name):
        if name not in cache:
            cache[name] = PrewaveletConstruction.for_preset(name)(get_preset(name).matrix)
        return cache[name]

    return build


@pytest.fixture(scope="session")
def preset_family():
    """Preset families without the basis certificate."""
    cache = {}

    def build(name):
        if name not in cache:
            construction = PrewaveletConstruction.for_preset(name, verify=False)
            cache[name] = construction(get_preset(name).matrix)
        return cache[name]

    return build
