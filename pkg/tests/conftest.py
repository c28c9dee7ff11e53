from pathlib import Path

import numpy as np
import pytest

from stratlab.grid import Grid
from stratlab.group import make_euclidean, make_heisenberg

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def cube(n1=3, nodes=17, lo=0.0, hi=1.0):
    return Grid(make_euclidean(n1), [(lo, hi)] * n1, [nodes] * n1)


def heis(nodes=17, lo=-1.0, hi=1.0):
    return Grid(make_heisenberg(1), [(lo, hi)] * 3, [nodes] * 3)


def sin_product(grid):
    u = np.ones(grid.shape)
    for c, (a, b) in zip(grid.coords, grid.ranges):
        u = u * np.sin(np.pi * (c - a) / (b - a))
    return grid.zero_boundary(u)


def random_interior(grid, rng, layers=1):
    """Random field vanishing on the outermost ``layers`` node layers."""
    u = rng.standard_normal(grid.shape)
    mask = np.zeros(grid.shape, dtype=bool)
    mask[tuple(slice(layers, -layers) for _ in grid.shape)] = True
    return np.where(mask, u, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
