"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.fixture
def notes(request):
    """Free-form detail lines shown next to the criterion's verdict."""
    marker = request.node.get_closest_marker("criterion")
    lines: list[str] = []
    if marker is not None:
        _RESULTS.setdefault(marker.args[0], {"title": marker.args[1], "ok": True, "notes": []})["notes"] = lines
    return lines


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    entry = _RESULTS.setdefault(marker.args[0], {"title": marker.args[1], "ok": True, "notes": []})
    entry["ok"] = entry["ok"] and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        verdict = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {entry['title']}")
        for line in entry["notes"]:
            terminalreporter.write_line(f"         {line}")
