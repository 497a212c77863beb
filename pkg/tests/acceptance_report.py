"""Collects the PASS/FAIL lines of the acceptance criteria for the run summary."""

LINES: list[str] = []
