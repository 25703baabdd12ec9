import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Recorder ``criterion(number, ok, detail)`` for acceptance checks.

    Prints a PASS/FAIL line immediately, keeps it for the terminal summary,
    and fails the test when ``ok`` is false.
    """
    store = request.config.stash.setdefault(_CRITERIA, {})

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        store.setdefault(number, []).append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        for line in store[number]:
            terminalreporter.write_line(line)
