import numpy as np
import pytest

from ccf.core_fields import Field, Symmetry, make_grid
from ccf.solver import OperatorSpec, SchemeConfig, run


def bump(grid, amplitude=5.0):
    return Field(grid, amplitude * np.exp(-grid.x**2), Symmetry.EVEN_MONOTONE)


@pytest.fixture(scope="session")
def bump_run():
    """Standard inviscid bump run up to the gradient threshold."""
    grid = make_grid("line", 4097, 6.0)
    return run(bump(grid), OperatorSpec(), SchemeConfig(grad_max=1e3), 2.0, 0.025)


@pytest.fixture(scope="session")
def viscous_run():
    grid = make_grid("line", 2049, 6.0)
    return run(bump(grid), OperatorSpec(eps=1e-3), SchemeConfig(grad_max=np.inf), 10.0, 0.25)


# criterion number -> (title, passed, detail), filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
