import pytest

RESULTS: dict = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def record(k: int, ok: bool, detail: str, soft: bool = False):
        status = "PASS" if ok else ("FAIL (soft gate)" if soft else "FAIL")
        RESULTS[k] = f"criterion {k}: {status}  {detail}"
        print(RESULTS[k])
        if not soft:
            assert ok, RESULTS[k]
    return record


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
