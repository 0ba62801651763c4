import numpy as np
import pytest

from zml import GridSpec, RealField


@pytest.fixture
def grid40():
    return GridSpec(1, 40.0, 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def band_limited(grid, rng, kmax=12, mean_zero=True):
    """Random real trigonometric polynomial with modes |k| <= kmax."""
    x = grid.x1d
    w = np.pi / grid.half_width
    vals = np.zeros(grid.shape)
    for k in range(0 if not mean_zero else 1, kmax + 1):
        a, b = rng.normal(size=2) / (1 + k)
        if grid.dim == 1:
            vals += a * np.cos(k * w * x) + b * np.sin(k * w * x)
        else:
            X, Y = grid.coords
            vals += a * np.cos(k * w * (X + 0.5 * Y)) + b * np.sin(k * w * (Y - 0.3 * X))
    return RealField(grid, vals)


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the lines are echoed in the terminal summary."""

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: s.split()[1]):
            terminalreporter.write_line(line)
