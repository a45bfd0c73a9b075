from __future__ import annotations

import warnings

import numpy as np
import pytest

from doublelambda.regimes import ReitValidityWarning

_ACCEPTANCE: dict[str, dict] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record_acceptance(request):
    """Attach a one-line measured summary to the running acceptance test."""

    def _record(detail: str):
        _ACCEPTANCE.setdefault(request.node.nodeid, {})["detail"] = detail

    return _record


@pytest.fixture(autouse=True)
def _quiet_reit_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ReitValidityWarning)
        yield


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    entry = _ACCEPTANCE.setdefault(report.nodeid, {})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["outcome"] = report.outcome


def pytest_terminal_summary(terminalreporter):
    rows = [(k, v) for k, v in _ACCEPTANCE.items() if "outcome" in v]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, entry in sorted(rows):
        name = nodeid.split("::")[-1].removeprefix("test_")
        tag = "PASS" if entry["outcome"] == "passed" else "FAIL"
        detail = entry.get("detail", "")
        terminalreporter.write_line(f"[{tag}] {name}  {detail}".rstrip())
