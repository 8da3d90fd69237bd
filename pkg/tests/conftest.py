import pytest

from jclean.catalog import catalog_ring
from jclean.config import Caps
from jclean.formal import FMatrix
from jclean.suite import ContextCache


@pytest.fixture(scope="session")
def cache():
    return ContextCache(Caps())


@pytest.fixture(scope="session")
def ctx(cache):
    """ctx("z4", 2) -> shared M2(Z4; 2) context."""
    def make(name, s):
        R = catalog_ring(name)
        return cache.context(R, R.element(s))
    return make


@pytest.fixture
def M():
    def make(a, b, c, d):
        return FMatrix(a, b, c, d)
    return make


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance():
    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
