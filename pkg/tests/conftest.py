import pytest

_REPORT_KEY = pytest.StashKey[dict]()
_DETAILS = pytest.StashKey[list]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[_REPORT_KEY] = {}


@pytest.fixture
def details(request):
    """Free-form notes attached to the criterion's summary line."""
    notes = []
    request.node.stash[_DETAILS] = notes
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = marker.args
    notes = item.stash.get(_DETAILS, [])
    status = "PASS" if report.passed else "FAIL"
    item.config.stash[_REPORT_KEY][number] = (status, title, "; ".join(notes))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_REPORT_KEY]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, notes = results[number]
        line = f"[{status}] criterion {number}: {title}"
        if notes:
            line += f" -- {notes}"
        terminalreporter.write_line(line)
