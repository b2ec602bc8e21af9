"""Shared acceptance bookkeeping.

The acceptance suite records one verdict per criterion; the summary hook
prints them as a block at the end of the run so the pass/fail state of
each criterion is visible at a glance even when the underlying test
carries many clauses.
"""

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


def record_criterion(number: int, label: str, passed: bool,
                     detail: str = "") -> None:
    _CRITERIA[number] = (label, passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        label, passed, detail = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {number}: {verdict} - {label}"
        if detail and not passed:
            line += f" ({detail})"
        terminalreporter.write_line(line)
