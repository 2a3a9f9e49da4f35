import numpy as np
import pytest

from hybrid_delay.model import SystemParams, ValidationError


@pytest.fixture
def base():
    return SystemParams(0.5, 90.0, 50.0, 100.0, 1)


def random_params(rng: np.random.Generator) -> SystemParams:
    """Rejection-sample feasible scenarios from the oracle-comparison ranges."""
    while True:
        b2 = rng.uniform(20.0, 250.0)
        b1 = rng.uniform(5.0, b2)
        try:
            return SystemParams(
                rng.uniform(0.05, 1.5), rng.uniform(10.0, 150.0), b1, b2, int(rng.integers(1, 11))
            )
        except ValidationError:
            continue


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion for the run summary."""

    def record(label: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
