import pytest

_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    note = dict(item.user_properties).get("note", "")
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        if hasattr(rep, "wasxfail"):
            note = "; ".join(filter(None, [note, f"known unattainable: {rep.wasxfail}"]))
        _results[number] = ("PASS" if rep.passed else "FAIL", note)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status, note = _results[number]
        line = f"criterion {number}: {status}"
        terminalreporter.write_line(f"{line}  ({note})" if note else line)
