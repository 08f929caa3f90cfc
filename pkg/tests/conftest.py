import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TABLE1 = [(6.25, 1.0, 1.0), (6.25, 1.0, 16.0), (0.25, 1.0, 1.0), (0.25, 1.0, 100.0)]


def joint_cov(st, sg, sf):
    """Covariance of (t, x_g, x_f) under the minimal model."""
    return np.array([[st, st, st], [st, st + sg, st], [st, st, st + sf]])


def covariance_oracle(st, sg, sf):
    """(slope, conditional variance, fused MSE) by Gaussian linear algebra.

    Independent of the package: the fused error is the quadratic form of the
    estimator's error weights against the joint covariance.
    """
    S = joint_cov(st, sg, sf)
    a = S[0, 2] / S[2, 2]
    A = np.array([[0.0, 0.0, a], [0.0, 1.0, 0.0]])
    C = A @ S @ A.T
    s = C[0, 0] - C[0, 1] ** 2 / C[1, 1]
    alpha = sg / (sg + s)
    w = np.array([-1.0, 1.0 - alpha, alpha * a])
    return a, s, float(w @ S @ w)


@pytest.fixture
def table1_params():
    return TABLE1


_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    _ACCEPTANCE[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] {number}. {title}")
