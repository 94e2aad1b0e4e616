import pytest

from vaoi_ring.core import SystemParams
from vaoi_ring.mdp import build_kernel, solve_rvia

ACCEPTANCE = []


@pytest.fixture(scope="session")
def paper_params():
    return SystemParams()


@pytest.fixture(scope="session")
def paper_kernel(paper_params):
    return build_kernel(paper_params)


@pytest.fixture(scope="session")
def paper_solution(paper_kernel):
    return solve_rvia(paper_kernel)


@pytest.fixture
def small_params():
    return SystemParams(n_ring_nodes_minus_one=4, battery_capacity=3, vaoi_cap=6, horizon=50, mc_iterations=8)


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""

    def record(number, title, passed, detail=""):
        ACCEPTANCE.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
