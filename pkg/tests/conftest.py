"""Shared fixtures: random grids and lattices with reproducible seeds."""

import sys

import numpy as np
import pytest

from floatersim.rules import Lattice


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Surface the acceptance verdict lines in the run summary."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICT_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.line(line)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20260817)


def random_grid(np_rng, h, w, p=(0.6, 0.25, 0.15)):
    """Random uint8 state grid with the given state distribution."""
    return np_rng.choice(np.arange(3, dtype=np.uint8), size=(h, w), p=p)


def random_lattice(np_rng, h, w, p=(0.6, 0.25, 0.15)) -> Lattice:
    return Lattice(random_grid(np_rng, h, w, p))


def grid_to_lists(grid) -> list[list[int]]:
    """Oracle functions take plain row lists."""
    return [[int(v) for v in row] for row in np.asarray(grid)]
