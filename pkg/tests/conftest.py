import time
from contextlib import contextmanager

import pytest

_RESULTS: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Context manager timing one acceptance criterion and logging PASS/FAIL."""

    @contextmanager
    def run(number: int, title: str, limit_s: float):
        start = time.perf_counter()
        status, note = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if elapsed >= limit_s:
                note = f" (over the {limit_s:g} s limit)"
                raise AssertionError(f"criterion {number} took {elapsed:.2f} s, limit {limit_s:g} s")
            status = "PASS"
        except BaseException as exc:
            note = note or f" ({type(exc).__name__}: {str(exc).splitlines()[0][:120]})"
            raise
        finally:
            elapsed = time.perf_counter() - start
            line = f"{status} criterion {number:2d}: {title} [{elapsed:.2f} s / {limit_s:g} s]{note}"
            _RESULTS[number] = line
            print(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(_RESULTS):
            terminalreporter.write_line(_RESULTS[number])
