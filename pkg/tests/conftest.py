import pytest

# One line per acceptance criterion, filled in by tests/test_acceptance.py.
GATE: dict[int, str] = {}


@pytest.fixture
def gate():
    def record(n: int, ok: bool, detail: str) -> bool:
        GATE[n] = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        print(GATE[n])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if GATE:
        terminalreporter.section("acceptance gate")
        for n in sorted(GATE):
            terminalreporter.write_line(GATE[n])
