import pytest

_RESULTS = "acceptance_results"


def pytest_configure(config):
    setattr(config, _RESULTS, {})


@pytest.fixture
def record_criterion(request):
    """Store (passed, detail) for an acceptance criterion; printed at the end."""
    store = getattr(request.config, _RESULTS)

    def record(number, passed, detail):
        store[number] = (passed, detail)
    return record


def pytest_terminal_summary(terminalreporter, config):
    store = getattr(config, _RESULTS, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        passed, detail = store[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
