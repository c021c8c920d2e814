import numpy as np
import pytest

from idp_lab.base_systems import (
    finite_invariant_base,
    moving_average_base,
    null_recurrent_walk_base,
    rigid_tower_base,
)
from idp_lab.process import leaf

WIDE_STEPS = [-5, -4, -3, -2, -1, 1, 2, 3, 4, 5]


def bernoulli_spec():
    return leaf(moving_average_base([1.0, 0.5], {"atoms": [[1.0, 1.0], [2.0, 0.5]]}), 0.0, "Nonnegative")


def walk_spec():
    return leaf(null_recurrent_walk_base(WIDE_STEPS), 0.0, "Nonnegative")


def tower_spec():
    return leaf(rigid_tower_base(3), 0.0, "Nonnegative")


def ii1_spec():
    return leaf(finite_invariant_base(1.5, {"name": "constant", "values": [2.0]}), 0.0, "Nonnegative")


SHIPPED = {"bernoulli": bernoulli_spec, "walk": walk_spec, "tower": tower_spec, "ii1": ii1_spec}


def mc_close(samples, exact, n_se=3.0):
    samples = np.asarray(samples)
    m = samples.mean()
    if np.iscomplexobj(samples):
        se = np.hypot(samples.real.std(ddof=1), samples.imag.std(ddof=1)) / np.sqrt(len(samples))
    else:
        se = samples.std(ddof=1) / np.sqrt(len(samples))
    return abs(m - exact) <= n_se * se + 1e-12, m, se


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
