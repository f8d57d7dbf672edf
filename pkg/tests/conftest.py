import warnings

import pytest

from hybridcz.config import resolve
from hybridcz.model import build_model, channel_overlaps


@pytest.fixture(scope="session")
def default_config():
    return resolve({})


@pytest.fixture(scope="session")
def default_model(default_config):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_model(default_config)


@pytest.fixture(scope="session")
def default_overlaps(default_model):
    return channel_overlaps(default_model)


_ACCEPTANCE_LINES = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _ACCEPTANCE_LINES.extend(v for k, v in report.user_properties if k == "acceptance")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
