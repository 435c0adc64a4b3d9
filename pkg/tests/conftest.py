import pytest

CRITERIA = {
    1: "Gaussian mean, full sample rate",
    2: "Gaussian mean, B1 and B2 rates",
    3: "Margin1D full sample and most-symmetric rates",
    4: "large-margin tail: exact vs Monte Carlo",
    5: "overlapping-pair count and bound",
    6: "most-symmetric teacher optimality",
    7: "exhaustive search ratio at n=16",
    8: "local-search ratio trend in d",
    9: "non-teachability of interval learners",
    10: "solver correctness",
}

_outcomes = {}
_details = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[number] = _outcomes.get(number, True) and rep.passed


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the current criterion."""
    number = request.node.get_closest_marker("criterion").args[0]

    def add(text):
        _details.setdefault(number, []).append(text)
    return add


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        status = "PASS" if _outcomes[number] else "FAIL"
        extra = "; ".join(_details.get(number, []))
        line = f"criterion {number:2d} {status}: {CRITERIA[number]}"
        terminalreporter.write_line(line + (f" [{extra}]" if extra else ""))
