import numpy as np
import pytest

from reachset.synthetic import SyntheticSpec, generate_trails

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "WAIVED"}[report.outcome]
        if report.outcome == "skipped" and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2]
        _criteria.append((marker.args[0], item.name, status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, status, detail in sorted(_criteria, key=lambda c: (str(c[0]), c[1])):
        terminalreporter.write_line(f"criterion {number}: {status}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cs_trails():
    return generate_trails(SyntheticSpec(n_trails=2000, v_true=8.0, seed=7))
