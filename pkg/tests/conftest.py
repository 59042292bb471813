"""Per-criterion PASS/FAIL summary for tests marked ``acceptance``."""

import pytest

_CRITERIA: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number = int(marker.args[0])
        entry = _CRITERIA.setdefault(number, {"title": marker.kwargs.get("title", ""), "ok": True, "details": []})
        entry["ok"] = entry["ok"] and rep.passed and not hasattr(rep, "wasxfail")
        entry["details"].extend(f"{k}={v}" for k, v in item.user_properties)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {entry['title']}")
        if entry["details"]:
            terminalreporter.write_line("              " + "; ".join(entry["details"]))
