import numpy as np
import pytest

from tlmax.sample_grid import GridSpec, SampledField


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(grid: GridSpec, rng) -> SampledField:
    z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return SampledField(grid, z)


def direct_dft(values: np.ndarray, h: float) -> np.ndarray:
    """O(N^2) DFT in numpy FFT order, scaled by the cell width."""
    n = len(values)
    j = np.arange(n)
    kernel = np.exp(-2j * np.pi * np.outer(j, j) / n)
    return h * (kernel @ values)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
