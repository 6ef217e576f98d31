import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from helpers import FIXTURES  # noqa: E402

from chaincore.game import build  # noqa: E402
from chaincore.io import parse_situation  # noqa: E402

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def ex2():
    return parse_situation(FIXTURES / "example2.json")


@pytest.fixture(scope="session")
def ex4():
    return parse_situation(FIXTURES / "example4.json")


@pytest.fixture(scope="session")
def ex5():
    return parse_situation(FIXTURES / "example5.json")


@pytest.fixture(scope="session")
def asym():
    return parse_situation(FIXTURES / "example2_asymmetric.json")


@pytest.fixture(scope="session")
def cf2(ex2):
    return build(ex2)


@pytest.fixture(scope="session")
def cf4(ex4):
    return build(ex4)


@pytest.fixture(scope="session")
def cf5(ex5):
    return build(ex5)


@pytest.fixture(scope="session")
def cf_asym(asym):
    return build(asym)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
