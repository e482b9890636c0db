import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion identifier")


def pytest_runtest_logreport(report):
    name = getattr(report, "criterion", None)
    if name is None:
        return
    if report.when == "call" or not report.passed:
        outcome = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        _criteria.setdefault(name, []).append(outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("-")[1])):
        outcomes = _criteria[name]
        if "FAIL" in outcomes:
            verdict = "FAIL"
        elif all(o == "SKIP" for o in outcomes):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"{name}: {verdict}")


@pytest.fixture
def toy_reads():
    return ["ACGACGACGC"]
