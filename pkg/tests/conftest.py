import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_acceptance: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, text): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, text = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = ""
        if report.failed:
            detail = str(report.longrepr).strip().splitlines()[-1][:160]
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _acceptance[n] = (status, text, detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        status, text, detail = _acceptance[n]
        line = f"criterion {n:2d}: {status}  {text}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
