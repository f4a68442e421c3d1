import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def acceptance_line(request):
    """Record a one-line verdict for the acceptance summary."""
    name = request.node.name

    def record(label: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES[name] = f"{label}: {'PASS' if passed else 'FAIL'} - {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES.values()):
            terminalreporter.write_line(line)
