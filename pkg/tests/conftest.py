import re

_RESULTS = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    detail = dict(report.user_properties).get("detail", "")
    _RESULTS[int(m.group(1))] = (m.group(2).replace("_", " "), report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        name, ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n} ({name}): {detail}")
