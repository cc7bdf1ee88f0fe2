import numpy as np
import pytest

from bogofock.symplectic import SigmaGenerator

# Frozen reference values for the generator S = 0.5i, T = 1 (d = 1), from the
# scalar closed form of tau integrated with scipy.integrate.quad at 1e-15.
PHASE_THETA = {
    0.25: -0.0012665696724094002,
    0.4: -0.004977639291193053,
    0.5: -0.009374080794027472,
    0.7: -0.0235067195251458,
    0.8: -0.0333173439728006,
    1.0: -0.05812418712119424,
    1.1: -0.07288027216661273,
}
SECH_HALF_SQRT = 0.9417106158316758  # sqrt(sech(0.5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def squeeze():
    return SigmaGenerator([[0.0]], [[0.5]])


@pytest.fixture
def phase():
    return SigmaGenerator([[0.5j]], [[1.0]])


@pytest.fixture
def rotation():
    return SigmaGenerator([[1j]], [[0.0]])


@pytest.fixture
def commuting2d():
    return SigmaGenerator(np.zeros((2, 2)), np.diag([0.3, 0.7]))


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
