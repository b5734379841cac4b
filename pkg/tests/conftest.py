import pytest

_CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Register an acceptance criterion; the outcome is taken from the test report."""
    def register(number: int, title: str):
        request.node.user_properties.append(("criterion", (number, title)))
    return register


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    for key, value in item.user_properties:
        if key != "criterion":
            continue
        number, title = value
        if report.when == "call" or (report.when == "setup" and report.failed):
            _CRITERIA[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
