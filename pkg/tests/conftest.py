import pytest

_LINES = []


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Call ``criterion(number, passed, detail)``; the line is echoed at the end
    of the run whatever the capture mode.
    """

    def record(number, passed, detail=""):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        _LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)

