import numpy as np
import pytest

from mifx.data import Dataset


def two_gaussians(seed, n=2000, d=16, shift=2.0):
    """Two balanced classes with means -shift*e1 and +shift*e1, identity covariance."""
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    X = rng.standard_normal((n, d))
    X[:, 0] += np.where(y == 0, -shift, shift)
    return Dataset.from_arrays(X, y, name="two-gaussians")


def blobs(seed, n=120, d=4, n_classes=3, spread=3.0):
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_classes, d)) * spread
    y = np.arange(n) % n_classes
    X = centers[y] + rng.standard_normal((n, d))
    return Dataset.from_arrays(X, y, name="blobs")


@pytest.fixture
def gauss_task():
    return two_gaussians(0)


@pytest.fixture
def small_blobs():
    return blobs(0)


@pytest.fixture
def fast_ga():
    from mifx.ga import GaConfig
    return GaConfig(population=24, generations=25, restarts=1)


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome, detail in _ACCEPTANCE:
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{verdict}  {name}  {detail}".rstrip())
