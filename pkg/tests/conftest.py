import os
from pathlib import Path

import pytest

from paraspin.verify import cmd_verify

ACCEPT_NMAX = 200_000


@pytest.fixture(scope="session")
def count_cache(tmp_path_factory) -> Path:
    """Point-count cache shared by the session; PARASPIN_TEST_CACHE reuses one across runs."""
    env = os.environ.get("PARASPIN_TEST_CACHE")
    if env:
        Path(env).mkdir(parents=True, exist_ok=True)
        return Path(env)
    return tmp_path_factory.mktemp("counts")


class _Reports:
    def __init__(self, cache):
        self.cache = cache
        self._done = {}

    def __call__(self, level, d_min=-200, n_max=ACCEPT_NMAX):
        key = (level, d_min, n_max)
        if key not in self._done:
            self._done[key] = cmd_verify(level, d_min=d_min, n_max=n_max, cache=self.cache)
        return self._done[key]


@pytest.fixture(scope="session")
def reports(count_cache):
    return _Reports(count_cache)


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """record(n, ok, detail): one pass/fail line per acceptance criterion."""

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n])
