import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    if rep.failed:
        _CRITERIA[number] = (False, text)
    elif rep.when == "call" and number not in _CRITERIA:
        _CRITERIA[number] = (rep.passed, text)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, text = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture(scope="session")
def searches():
    """Optimum searches shared across test modules (each takes a few seconds)."""
    from qbtangle.oracle import maximize_tau13
    from qbtangle.propagator import StateClass

    cache = {}

    def get(cls, omega_hat_sq, k):
        key = (StateClass.parse(cls), omega_hat_sq, k)
        if key not in cache:
            cache[key] = maximize_tau13(*key)
        return cache[key]

    return get
