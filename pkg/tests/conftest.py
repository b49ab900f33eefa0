"""Shared fixtures.  Expensive solves are session-scoped so the
acceptance tests and the module tests reuse one result."""
import time

import pytest

import gptrap

_criterion_lines: list[str] = []


def record_criterion(label: str, ok: bool, detail: str) -> bool:
    """Collect one acceptance line; shown in the terminal summary."""
    word = "PASS" if ok else "FAIL"
    _criterion_lines.append(f"[criterion {label}] {word}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criterion_lines):
            terminalreporter.line(line)


@pytest.fixture
def criterion():
    return record_criterion


@pytest.fixture(scope="session")
def radial_grid():
    return gptrap.Grid(kind="radial", h=0.02, R=8.0, boundary="decay")


@pytest.fixture(scope="session")
def harmonic_trap():
    return gptrap.TrapPotential.harmonic()


@pytest.fixture(scope="session")
def harmonic_solution(harmonic_trap, radial_grid):
    """Unit harmonic trap at coupling a = N = 1."""
    return gptrap.minimize(harmonic_trap, 1.0, 1.0, radial_grid)


@pytest.fixture(scope="session")
def quartic_solution(radial_grid):
    return gptrap.minimize(gptrap.TrapPotential.power(4.0), 1.0, 1.0,
                           radial_grid)


@pytest.fixture(scope="session")
def sandwich_run(harmonic_trap):
    """The full hard-sphere sandwich over three decades of N, timed."""
    t0 = time.perf_counter()
    report = gptrap.sandwich_report(
        gptrap.InteractionPotential.hard_sphere(1.0), 1.0,
        [1e3, 1e4, 1e5], harmonic_trap)
    return {"report": report, "seconds": time.perf_counter() - t0}
