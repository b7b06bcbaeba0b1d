import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def iiwa():
    from aiik.kinematics import iiwa14

    return iiwa14()


@pytest.fixture(scope="session")
def r3():
    from aiik.kinematics import planar3r

    return planar3r()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# acceptance reporting: one line per criterion, shown even under capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
