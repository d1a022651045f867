import os

import numpy as np
import pytest
from hypothesis import settings

from gepase.grid2d import GridMap, scale_map

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MAPS_DIR = os.path.join(ROOT, "data", "maps")
SMALL_MAPS_DIR = os.path.join(ROOT, "data", "maps_small")


def random_grid(seed: int, size: int = 16, density: float = 0.15, scale: int = 4) -> GridMap:
    rng = np.random.default_rng(seed)
    return scale_map(GridMap(rng.random((size, size)) < density, f"rand{seed}"), scale)


@pytest.fixture
def free_grid():
    return GridMap(np.zeros((64, 64), dtype=bool), "free64")


@pytest.fixture
def city_map_path():
    return os.path.join(MAPS_DIR, "city0_128.map")


@pytest.fixture
def small_map_paths():
    return sorted(
        os.path.join(SMALL_MAPS_DIR, f) for f in os.listdir(SMALL_MAPS_DIR) if f.endswith(".map")
    )


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def verdict(request, capsys):
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        request.config.stash[ACCEPTANCE_LINES].append(line)
        with capsys.disabled():
            print("\n" + line)

    return record
