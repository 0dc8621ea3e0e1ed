import pytest

from wfresil.solver import bundled_solver_config, default_solver_config


@pytest.fixture(scope="session")
def solver_config():
    """Session solver: honours WFRESIL_ASP_SOLVER / clingo, else the bundled
    interpreter, so the suite runs hermetically."""

    return default_solver_config(timeout=120.0)


@pytest.fixture(scope="session")
def bundled_config():
    return bundled_solver_config(timeout=120.0)
