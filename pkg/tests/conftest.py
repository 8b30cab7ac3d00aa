import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    def _report(number, passed, detail):
        line = f"CRITERION {number} {'PASS' if passed else 'FAIL'}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
