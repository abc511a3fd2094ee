import numpy as np
import pytest

# (criterion, passed, detail) lines collected by the acceptance suite and
# printed once at the end of the run.
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_LOG, key=lambda e: int(e[0].split()[0][1:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
