import sys
from pathlib import Path

import pytest

from bodygirth.synthetic import FixtureSpec, generate

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def humanoid():
    return generate(FixtureSpec("humanoid_proxy", rings=91))


@pytest.fixture(scope="session")
def small_humanoid():
    return generate(FixtureSpec("humanoid_proxy", n=32, rings=30, arm_n=8))


@pytest.fixture(scope="session")
def cylinder():
    return generate(FixtureSpec("cylinder", n=64, rings=5, radius=0.5, height=1.0))


# one PASS/FAIL line per acceptance criterion at the end of the run
_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        previous = _criteria.get(name, "passed")
        _criteria[name] = report.outcome if previous == "passed" else previous


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria.items():
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{status:5} {name}")
