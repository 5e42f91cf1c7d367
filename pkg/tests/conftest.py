"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n = mark.args[0]
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[n] = ("PASS" if rep.passed else "FAIL", item.name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        verdict, name, detail = _CRITERIA[n]
        line = f"{verdict} criterion {n} ({name})"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
