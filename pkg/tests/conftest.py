from __future__ import annotations

import time

import pytest

_RESULTS: list[tuple[int, bool, str, float]] = []


class AcceptanceRecorder:
    """Times one acceptance criterion and records a single pass/fail line."""

    def __init__(self, number: int):
        self.number = number
        self.start = time.perf_counter()

    def finish(self, passed: bool, detail: str) -> None:
        elapsed = time.perf_counter() - self.start
        _RESULTS.append((self.number, bool(passed), detail, elapsed))
        line = f"{'PASS' if passed else 'FAIL'} criterion {self.number}: {detail} [{elapsed:.1f} s]"
        print(line)
        assert passed, line


@pytest.fixture
def criterion():
    return AcceptanceRecorder


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail, elapsed in sorted(_RESULTS):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail} [{elapsed:.1f} s]")
