import pytest

CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for an acceptance criterion."""
    def record(key, passed, detail=""):
        CRITERIA[key] = (bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] {key} {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA, key=lambda k: int(k.split()[0][1:])):
        passed, detail = CRITERIA[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key}  {detail}")
