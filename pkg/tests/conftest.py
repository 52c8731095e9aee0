import mpmath
import pytest

_results = {}


@pytest.fixture(autouse=True)
def _oracle_precision():
    # mpmath is only the test oracle; give every test the same 120 digits
    with mpmath.workdps(120):
        yield


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    prev = _results.get(crit, True)
    _results[crit] = prev and report.passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_results):
        status = "PASS" if _results[crit] else "FAIL"
        terminalreporter.write_line(f"criterion {crit:>2}: {status}")
