"""Shared pytest hooks for the acceptance report.

Acceptance tests record one summary line per criterion; emitting them from
the terminal-summary hook keeps them visible under pytest's default output
capture.
"""

CRITERION_LINES = []


def record_criterion(line: str) -> None:
    CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERION_LINES:
        terminalreporter.write_line(line)
