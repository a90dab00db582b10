import numpy as np
import pytest

from fidvr.criteria import StepwiseCriterion, example_criteria
from fidvr.synth import build_corpus, builtin_template


@pytest.fixture(scope="session")
def criteria():
    return example_criteria()


@pytest.fixture(scope="session")
def acceptance_corpus():
    return build_corpus(builtin_template("acceptance"))


@pytest.fixture
def uv_example():
    return StepwiseCriterion("lower_bound", ((0.0, 0.7), (0.5, 0.8), (2.0, 0.9)), 0.9)


@pytest.fixture
def ov_example():
    # the UV example mirrored about 1 pu
    return StepwiseCriterion("upper_bound", ((0.0, 1.3), (0.5, 1.2), (2.0, 1.1)), 1.1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary: one pass/fail line per criterion --------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = marker.args
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _ACCEPTANCE[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, detail = _ACCEPTANCE[number]
        line = f"[{status}] {number:>2}. {title}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
