import re

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    entry = _results.setdefault(n, {"ok": True, "details": []})
    if report.when == "call":
        ok = report.passed and not hasattr(report, "wasxfail")
        entry["ok"] &= ok
        entry["details"] += [v for k, v in report.user_properties if k == "detail"]
    elif report.failed or report.skipped:
        # setup or teardown problems count against the criterion
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        entry = _results[n]
        status = "PASS" if entry["ok"] else "FAIL"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"criterion {n:2d} {status}  {detail}")
