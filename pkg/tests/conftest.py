import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance results, filled by test_acceptance.py and printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def model():
    from rtd_swipt.eh_model import table_i_model

    return table_i_model()


@pytest.fixture(scope="session")
def h_tilde():
    from rtd_swipt.channel import LinkBudget, large_scale_gain

    return large_scale_gain(LinkBudget())


@pytest.fixture(scope="session")
def a_bar(model, h_tilde):
    from rtd_swipt.channel import effective_amplitude_cap

    return effective_amplitude_cap(1.0, h_tilde, model.rho_max_w)


@pytest.fixture(scope="session")
def sigma2():
    return 10.0 ** ((-50.0 - 30.0) / 10.0)


@pytest.fixture(scope="session")
def p_max_ref(model):
    return model.psi(1.8e-3)
