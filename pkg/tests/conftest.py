import pytest

from signalmfg import Quadrature, casestudy
from signalmfg.equilibrium import SolverConfig, solve_mf_finite

# One line per acceptance criterion, echoed at the end of the run so the
# PASS/FAIL summary survives pytest's output capture.
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def quad128():
    return Quadrature.standard_normal()


@pytest.fixture(scope="session")
def ref_pop():
    return casestudy.reference_population()


@pytest.fixture(scope="session")
def ref_eq(ref_pop, quad128):
    return solve_mf_finite(ref_pop, quad128, SolverConfig())
