import pytest

ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    """Store a criterion verdict for the end-of-run summary."""
    def _record(key: str, passed: bool, detail: str):
        ACCEPTANCE[key] = (bool(passed), detail)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
