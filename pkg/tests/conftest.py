import pytest

from chrw.model import DriveParams

ACCEPTANCE_RESULTS = []


@pytest.fixture
def fig2a():
    """A1 = 0.5, r = 1, beat frequency 0.2, on the one-photon resonance region."""
    return DriveParams.from_ratio(1.0, 0.5, 1.0, 0.2)


@pytest.fixture
def fig5():
    """Slow beat: A1 = 0.2, r = 1, beat frequency 0.005, omega0 = omega1."""
    return DriveParams.from_ratio(1.0, 0.2, 1.0, 0.005)


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary."""

    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_RESULTS.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
