import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from emfexposure import NetworkParams, UserModel, validate

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def defaults():
    return validate(NetworkParams())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def params_for(model, **changes):
    return validate(NetworkParams(**changes), UserModel.parse(model))


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance check; returns ``ok``."""

    def record(criterion, label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion} [{label}] {detail}".rstrip()
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
