from collections import OrderedDict

import pytest

_results: "OrderedDict[str, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion this test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        cid, title = marker.args
        entry = _results.setdefault(str(cid), {"title": title, "passed": 0, "failed": [], "notes": []})
        if report.passed:
            entry["passed"] += 1
        elif not report.skipped:
            entry["failed"].append(item.name)
        entry["notes"].extend(v for k, v in item.user_properties if k == "note")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, entry in _results.items():
        status = "FAIL" if entry["failed"] else "PASS"
        total = entry["passed"] + len(entry["failed"])
        tr.write_line(f"[{status}] criterion {cid}: {entry['title']} ({entry['passed']}/{total} checks)")
        for note in entry["notes"]:
            tr.write_line(f"         {note}")
        for name in entry["failed"]:
            tr.write_line(f"         failed: {name}")
