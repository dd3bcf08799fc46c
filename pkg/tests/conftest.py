from __future__ import annotations

import contextlib

import pytest

from ttqpo import integrate, make_constant_schedule, make_cubic_schedule

FINAL_TIMES = (0.2, 0.5, 2.0)
OMEGA0, OMEGAF = 2.0, 4.0

# criterion number -> (status, description, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict[int, tuple[str, str, str]] = {}


@contextlib.contextmanager
def criterion(number: int, description: str):
    """Record the outcome of one acceptance criterion for the summary report."""
    try:
        yield
    except AssertionError as exc:
        first = str(exc).strip().splitlines()[0] if str(exc).strip() else "assertion failed"
        ACCEPTANCE_RESULTS[number] = ("FAIL", description, first)
        print(f"CRITERION {number:2d}: FAIL - {description} ({first})")
        raise
    else:
        ACCEPTANCE_RESULTS[number] = ("PASS", description, "")
        print(f"CRITERION {number:2d}: PASS - {description}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        status, description, detail = ACCEPTANCE_RESULTS[number]
        line = f"CRITERION {number:2d}: {status} - {description}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)


def cubic(tf: float):
    return make_cubic_schedule(0.0, tf, OMEGA0, OMEGAF)


@pytest.fixture(scope="session")
def schedules():
    return {tf: cubic(tf) for tf in FINAL_TIMES}


@pytest.fixture(scope="session")
def tt_trajectories(schedules):
    return {tf: integrate(s, "tt", rel_tol=1e-10) for tf, s in schedules.items()}


@pytest.fixture(scope="session")
def adiabatic_trajectories(schedules):
    return {tf: integrate(s, "adiabatic", rel_tol=1e-10) for tf, s in schedules.items()}


@pytest.fixture(scope="session")
def constant3():
    return make_constant_schedule(0.0, 2.0, 3.0)
