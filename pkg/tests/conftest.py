import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Record one summary line per acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
