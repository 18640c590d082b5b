import copy
import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
LISTING1_PATH = DATA / "listing1.json"


@pytest.fixture
def listing1_text() -> str:
    return LISTING1_PATH.read_text(encoding="utf-8")


@pytest.fixture
def listing1_obj() -> dict:
    return json.loads(LISTING1_PATH.read_text(encoding="utf-8"))


def mutate(obj: dict, fn) -> str:
    """Apply ``fn`` to a deep copy of ``obj`` and return the JSON text."""
    clone = copy.deepcopy(obj)
    fn(clone)
    return json.dumps(clone)


_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda n: int(n.split("_")[2])):
        terminalreporter.write_line(f"{_acceptance[name]}  {name}")
