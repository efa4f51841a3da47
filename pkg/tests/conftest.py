import pytest

ACCEPTANCE = {}


def record(number, title, passed, detail=""):
    """Store one acceptance outcome and echo it as a PASS/FAIL line."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:02d}: {title}" + (f"  [{detail}]" if detail else "")
    ACCEPTANCE[number] = line
    print(line)
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
