import re

import pytest

from magnusconv import corpus
from magnusconv.magnus import magnus_terms


@pytest.fixture(scope="session")
def ex1():
    return corpus.get("ex1")


@pytest.fixture(scope="session")
def ex2():
    return corpus.get("ex2")


@pytest.fixture(scope="session")
def ex3():
    return corpus.get("ex3")


@pytest.fixture(scope="session")
def ex4():
    return corpus.get("ex4")


@pytest.fixture(scope="session")
def ex3_series(ex3):
    return magnus_terms(ex3.poly, 30)


@pytest.fixture(scope="session")
def ex4_series(ex4):
    # about ten seconds; shared by every test that needs thirty terms
    return magnus_terms(ex4.poly, 30)


# one PASS/FAIL line per acceptance criterion at the end of the run

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        ok = all(_results[k])
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}")
