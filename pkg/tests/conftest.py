"""Shared fixtures: the acceptance-criterion recorder.

Acceptance tests register one line per criterion through ``criterion_log``;
the collected lines are printed in a dedicated section at the end of the
run so the pass/fail status of every criterion is visible in one place
even when pytest's own output is long.
"""

import pytest

_CRITERION_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def criterion_log():
    """Record a one-line verdict for an acceptance criterion.

    Call as ``criterion_log(number, passed, detail)``; the line is shown in
    the terminal summary.  Record before asserting so a failing criterion
    still reports its measurements.
    """

    def record(number: int, passed, detail: str) -> None:
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        _CRITERION_LINES[number] = f"criterion {number:2d}: {status}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERION_LINES):
            terminalreporter.write_line(_CRITERION_LINES[number])
