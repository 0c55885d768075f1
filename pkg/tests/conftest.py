import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import CALIBRATED_LAMBDA  # noqa: E402
from wildfront.harness import run_scenario  # noqa: E402
from wildfront.params import PhysicalParams, nondimensionalize  # noqa: E402
from wildfront.scenario import load_scenario  # noqa: E402


def scaled(w=0.0, h=4.0, **kw):
    return nondimensionalize(PhysicalParams(w=w, h=h, **kw), CALIBRATED_LAMBDA)


@pytest.fixture
def d0():
    return scaled()


@pytest.fixture(scope="session")
def bundled_reports():
    """Full runs (all variants plus shooting) of the bundled scenarios, without writing files."""
    names = ("no_wind", "mild_wind", "strong_wind", "extinction")
    return {name: run_scenario(load_scenario(name), write=False) for name in names}
