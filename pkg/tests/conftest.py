import pytest

ACCEPTANCE = pytest.StashKey[dict]()

CRITERIA = {
    1: "domain volume ratio",
    2: "reference-design masses",
    3: "entropy-rate substitute properties",
    4: "physics invariants",
    5: "GP correctness",
    6: "acquisition oracle",
    7: "feasibility milestone",
    8: "end-to-end front",
    9: "hidden-constraint handling",
    10: "determinism",
    11: "baseline dominance",
}


@pytest.fixture
def report(request):
    """Record one acceptance verdict and fail the test when it does not hold."""
    store = request.config.stash.setdefault(ACCEPTANCE, {})

    def _report(number, ok, detail):
        line = f"criterion {number:2d} ({CRITERIA[number]}): {'PASS' if ok else 'FAIL'}  {detail}"
        store[number] = line
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(ACCEPTANCE, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number, name in CRITERIA.items():
        terminalreporter.write_line(store.get(number, f"criterion {number:2d} ({name}): NOT RUN"))
