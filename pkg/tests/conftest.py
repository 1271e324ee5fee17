import random
import time

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fixed", derandomize=True, deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fixed")

# criterion -> list of (part, ok, detail); one summary line per criterion
ACCEPTANCE = {}


def record(criterion, part, ok, detail):
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))


def acceptance_lines():
    lines = []
    for crit in sorted(ACCEPTANCE):
        parts = sorted(ACCEPTANCE[crit])
        ok = all(p[1] for p in parts)
        shown = parts if ok else [p for p in parts if not p[1]]
        detail = "; ".join(f"{p[0]}: {p[2]}" for p in shown)
        lines.append(f"ACCEPTANCE {crit:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return lines


@pytest.fixture
def rng():
    return random.Random(20240611)


_START = [time.perf_counter()]


def pytest_sessionstart(session):
    _START[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if 10 in ACCEPTANCE:
        elapsed = time.perf_counter() - _START[0]
        record(10, "b session runtime", elapsed < 180, f"{elapsed:.1f} s for this run (< 180 s)")
    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
