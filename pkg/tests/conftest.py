import contextlib
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class _Criterion:
    def __init__(self):
        self.detail = ""


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per acceptance criterion."""
    lines = request.config._acceptance_lines

    @contextlib.contextmanager
    def run(number, title):
        c = _Criterion()
        t0 = time.perf_counter()
        try:
            yield c
        except BaseException as exc:
            lines.append(f"[FAIL] {number:>2}. {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
            raise
        lines.append(f"[PASS] {number:>2}. {title} ({time.perf_counter() - t0:.1f}s) {c.detail}")

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s[7:9])):
            terminalreporter.write_line(line)
