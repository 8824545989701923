import numpy as np
import pytest

from afnls import ModelParams, build_grid
from afnls import ground_state as G

# grids on which the alpha = 1 ground states are resolved to ~1e-4 in Q/hdot
GRID_HALF = (128, 512, 10, 40)      # s = 1/2: algebraic y^-2 tails need a long box
GRID_34 = (128, 256, 10, 20)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20241018)


@pytest.fixture(scope="session")
def pi_box():
    return build_grid(8, 8, np.pi, np.pi)


@pytest.fixture(scope="session")
def gs_half_3():
    g = build_grid(*GRID_HALF)
    pr = ModelParams(0.5, 3.0)
    return G.solve_fixed_alpha(pr, g), g, pr


@pytest.fixture(scope="session")
def gs_34_4():
    g = build_grid(*GRID_34)
    pr = ModelParams(0.75, 4.0)
    return G.solve_fixed_alpha(pr, g), g, pr


@pytest.fixture(scope="session")
def gs_34_5():
    g = build_grid(256, 512, 12, 24)
    pr = ModelParams(0.75, 5.0)
    return G.solve_fixed_alpha(pr, g), g, pr


def pytest_configure(config):
    config._acceptance = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: (int(l.split()[0].rstrip("abcd")), l)):
            terminalreporter.write_line(line)
