"""Collects per-criterion verdict lines from the acceptance tests and
prints them as a summary section, past pytest's output capture."""

_verdict_lines = []


def record_verdict(line: str) -> None:
    _verdict_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _verdict_lines:
        terminalreporter.section("acceptance criteria")
        for line in _verdict_lines:
            terminalreporter.line(line)
