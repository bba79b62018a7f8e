from dataclasses import replace

import pytest

from seamrac.config import RunConfig


def with_sim(cfg=None, **kw):
    cfg = cfg or RunConfig()
    return replace(cfg, simulation=replace(cfg.simulation, **kw))


@pytest.fixture
def short_cfg():
    return with_sim(duration=2.0)


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    """Store a one-line verdict for the summary and return ``ok``."""
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
