import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def record(request):
    """Record one acceptance line: ``record(number, passed, detail)``."""
    results = request.config.stash[_RESULTS]

    def _record(number, passed, detail):
        results.append((number, bool(passed), detail))
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(results):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
