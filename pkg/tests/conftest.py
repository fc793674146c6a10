"""Shared pytest plumbing: the acceptance-criteria reporting hook."""
from __future__ import annotations

acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    """Collect one criterion verdict for the end-of-run summary."""
    acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)
