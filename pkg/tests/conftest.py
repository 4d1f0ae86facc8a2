import re

# criterion number -> detail line recorded by the acceptance tests
ACCEPTANCE_DETAILS = {}
_OUTCOMES = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _OUTCOMES[k] = _OUTCOMES.get(k, "PASS") if report.passed else "FAIL"
        if not report.passed:
            _OUTCOMES[k] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_OUTCOMES):
        detail = ACCEPTANCE_DETAILS.get(k, "")
        terminalreporter.write_line(f"criterion {k:2d}: {_OUTCOMES[k]}  {detail}")
