import numpy as np
import pytest

# one "criterion N: PASS/FAIL — ..." line per acceptance criterion,
# printed as a dedicated section at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = (
        f"criterion {number}: {'PASS' if passed else 'FAIL'} — {detail}"
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_img(rng):
    """A generic 24x32 test image away from the gamut boundary."""
    return (0.05 + 0.9 * rng.random((24, 32, 3))).astype(np.float32)


@pytest.fixture
def midtone_img(rng):
    """Mid-tone image where every edit action has visible effect headroom."""
    return (0.25 + 0.5 * rng.random((20, 20, 3))).astype(np.float32)
