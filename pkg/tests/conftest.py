import dataclasses
from functools import lru_cache

import pytest

from nonlocal_fp import parse_config, run

DEFAULT_TEXT = """\
dim = 2
grid = 64 64
beta = 1.0
potential = coupled a=1.0 c=0.5
dt = 5e-4
t_final = 10
"""

ACCEPTANCE_LINES: list[str] = []


def default_config(**overrides):
    cfg = parse_config(DEFAULT_TEXT)
    return dataclasses.replace(cfg, **overrides)


def cached_run(dt=None, **overrides):
    """Session-wide memo of full runs keyed by config overrides and dt."""
    cfg = default_config(**overrides)
    return _run_memo(cfg, cfg.dt if dt is None else dt)


@lru_cache(maxsize=None)
def _run_memo(cfg, dt):
    return run(cfg, dt=dt)


def small_config(**overrides):
    text = """\
dim = 2
grid = 16 16
beta = 1.0
potential = coupled a=1.0 c=0.5
dt = 1e-3
t_final = 0.05
"""
    return dataclasses.replace(parse_config(text), **overrides)


@pytest.fixture
def small_cfg():
    return small_config()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
