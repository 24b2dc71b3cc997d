import contextlib
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_OUTCOMES = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write(tmp_path):
    """Write ``text`` to ``tmp_path / name`` and return the path."""

    def _write(name, text):
        p = tmp_path / name
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
        return p

    return _write


class Criterion:
    """Times one acceptance check and records a PASS/FAIL/SKIP line for it."""

    def __init__(self, config):
        self.lines = config.stash.setdefault(_OUTCOMES, [])
        self.detail = ""
        self.elapsed = 0.0

    def _log(self, number, status, title):
        line = f"criterion {number}: {status:4s} {title} [{self.elapsed:.2f} s] {self.detail}".rstrip()
        self.lines.append(line)
        print(line)

    @contextlib.contextmanager
    def __call__(self, number, title, limit=None):
        self.detail = ""
        start = time.perf_counter()
        try:
            yield self
        except pytest.skip.Exception:
            self.elapsed = time.perf_counter() - start
            self._log(number, "SKIP", title)
            raise
        except BaseException:
            self.elapsed = time.perf_counter() - start
            self._log(number, "FAIL", title)
            raise
        self.elapsed = time.perf_counter() - start
        if limit is not None and self.elapsed >= limit:
            self.detail = f"{self.detail} runtime over {limit} s".strip()
            self._log(number, "FAIL", title)
            raise AssertionError(f"criterion {number} took {self.elapsed:.2f} s, limit {limit} s")
        self._log(number, "PASS", title)


@pytest.fixture
def criterion(request):
    return Criterion(request.config)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_OUTCOMES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
