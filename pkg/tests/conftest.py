import numpy as np
import pytest

from onis import DistanceKind, distance

_acceptance: dict = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(id, description): tags an acceptance-criterion test for the "
        "pass/fail summary",
    )


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # First call triggers JIT compilation under the numba backend; keep that
    # cost out of individual test timings.
    a = np.array([0.2, 0.8, 0.0])
    b = np.array([0.5, 0.1, 1.0])
    for tag in ("symmetric_kl", "euclidean", "cosine"):
        distance(DistanceKind(tag), a, b)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and report.when == "call":
        cid, desc = marker.args
        entry = _acceptance.setdefault(cid, {"desc": desc, "passed": 0, "failed": 0})
        if report.passed:
            entry["passed"] += 1
        elif report.failed:
            entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_acceptance):
        e = _acceptance[cid]
        status = "PASS" if e["failed"] == 0 else "FAIL"
        terminalreporter.write_line(
            f"[{status}] {cid} {e['desc']} "
            f"({e['passed']} passed, {e['failed']} failed)"
        )
