import numpy as np
import pytest

from pinvforecast.generators import mackey_glass


@pytest.fixture(scope="session")
def mg_series():
    return mackey_glass()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion and print it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(number, label, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        lines.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
