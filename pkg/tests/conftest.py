from collections import defaultdict

import pytest

from pbnn.canonical import Permutation

IDENTITY7 = Permutation.parse("1 2 3 4 5 6 7")
INTERLEAVED7 = Permutation.parse("1 5 2 6 3 7 4")
GBPO50 = Permutation.parse("1 2 4 10 11 3 7 12 8 14 16 5 15 9 17 6 13")
GBPO100 = Permutation.parse("1 3 11 14 4 13 8 15 12 7 16 10 5 17 6 2 9")

_criteria: dict = {}
_outcomes: dict = defaultdict(list)


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        crit = _criteria.get(report.nodeid)
        if crit is not None:
            _outcomes[crit].append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), outcomes in sorted(_outcomes.items()):
        ok = all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] AC{num:>2} {title}")


@pytest.fixture
def gbpo50():
    return GBPO50


@pytest.fixture
def gbpo100():
    return GBPO100
