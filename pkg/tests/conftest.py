import pytest

ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    """Record a criterion verdict for the end-of-run acceptance report."""

    def record(number, name, passed, detail=""):
        ACCEPTANCE[number] = (name, passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}")
