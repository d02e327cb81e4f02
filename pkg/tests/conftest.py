import numpy as np
import pytest

from pechannel.calculus import COS, SIN, GridSpec, ScalarField3, VectorFieldH, truncate
from pechannel.model import ModelParams, make_state


def random_field(grid, basis=COS, seed=0, scale=1.0):
    """Random field projected onto the retained (dealiased) modes."""
    rng = np.random.default_rng(seed)
    raw = ScalarField3(grid, scale * rng.standard_normal(grid.shape), basis)
    return truncate(raw, basis)


def random_state(grid, seed=0, amp_v=1.0, amp_T=1.0):
    v = VectorFieldH(random_field(grid, COS, seed, amp_v), random_field(grid, COS, seed + 1, amp_v))
    return make_state(v, random_field(grid, SIN, seed + 2, amp_T))


def zero_mean_levels(f):
    """Remove the horizontal mean on every level."""
    vals = f.values - f.values.mean(axis=(0, 1), keepdims=True)
    return ScalarField3(f.grid, vals, f.basis)


@pytest.fixture
def grid16():
    return GridSpec(16, 16, 17, 1.0)


@pytest.fixture
def grid32():
    return GridSpec(32, 32, 17, 1.0)


@pytest.fixture
def params():
    return ModelParams(R1=5.0, R2=2.0, R3=1.0, f0=1.0)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
