import pytest

# (criterion number, title, status, detail), filled by tests/test_acceptance.py
ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line; ``status`` is PASS, FAIL or NOT RUN."""

    def record(number, title, ok, detail="", status=None):
        status = status or ("PASS" if ok else "FAIL")
        ACCEPTANCE.append((number, title, status, detail))
        print(f"criterion {number} {status}: {title} ({detail})")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{status:>7}] {number:>2}. {title}: {detail}")
