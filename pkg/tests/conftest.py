"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from __future__ import annotations

import pytest

CRITERIA = {
    1: "corpus validity",
    2: "golden translation",
    3: "statement accumulation",
    4: "mixed-assignment rejection",
    5: "negative semantic suite",
    6: "round-trip property",
    7: "counterexample reproduction with the Alloy Analyzer",
    8: "determinism",
    9: "lexer properties",
}

_outcomes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if report.when == "call" or (report.when == "setup" and (report.skipped or report.failed)):
        state = "skipped" if report.skipped else ("passed" if report.passed else "failed")
        _outcomes.setdefault(n, []).append(state)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        states = _outcomes.get(n)
        if not states:
            verdict = "NOT RUN"
        elif "failed" in states:
            verdict = "FAIL"
        elif all(s == "skipped" for s in states):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {n} ({title}): {verdict}")
