import sys
from pathlib import Path

import pytest

# Make the reference implementations in tests/oracles.py importable.
sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> list of (passed, detail) recorded by tests/test_acceptance.py
CRITERIA: dict = {}


@pytest.fixture(scope="session")
def criterion_log():
    def record(number: int, passed: bool, detail: str) -> None:
        CRITERIA.setdefault(number, []).append((bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        parts = CRITERIA[number]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status} - " + "; ".join(d for _, d in parts))
