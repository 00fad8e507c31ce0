"""Shared pytest hooks.

Acceptance tests record one human-readable PASS/FAIL line per criterion in
ACCEPTANCE_LINES; the lines are echoed after the run so they are visible even
though pytest captures per-test stdout.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
