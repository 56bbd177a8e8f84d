import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line (or an INFO line when ``ok`` is None) for the terminal summary."""

    def record(num: int, ok, detail: str):
        tag = "INFO" if ok is None else ("PASS" if ok else "FAIL")
        line = f"criterion {num}: {tag} - {detail}"
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
