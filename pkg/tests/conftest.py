import pytest

# verdict lines printed by the acceptance suite, repeated in the summary
ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line for a criterion and return the flag."""
    def report(k, ok, text):
        line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {text}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return report


@pytest.fixture
def note(capsys):
    def say(text):
        with capsys.disabled():
            print("      " + text)
    return say


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
