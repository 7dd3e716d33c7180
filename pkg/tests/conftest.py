import pytest

ACCEPTANCE_LINES = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
