from datetime import date, datetime, timezone

import numpy as np
import pytest

from routinemap.eventlog import DayTrace, Visit

_ACCEPTANCE = []


def epoch(text: str) -> int:
    return int(datetime.fromisoformat(text).replace(tzinfo=timezone.utc).timestamp())


def make_trace(day: str, visits, steps: int = 0, subject: str = "p1") -> DayTrace:
    """visits: [(location, dwell seconds), ...] starting at the day's midnight UTC."""
    t = epoch(day + "T00:00:00")
    events = []
    for loc, dwell in visits:
        events.append(Visit(loc, t, dwell))
        t += dwell
    return DayTrace(date.fromisoformat(day), tuple(events), steps, subject)


def random_trace(rng: np.random.Generator, day: str, vocab=("A", "B", "C", "D", "E")) -> DayTrace:
    n = int(rng.integers(1, 12))
    seq = [vocab[int(rng.integers(len(vocab)))]]
    while len(seq) < n:
        nxt = vocab[int(rng.integers(len(vocab)))]
        if nxt != seq[-1]:
            seq.append(nxt)
    return make_trace(day, [(loc, int(rng.integers(1, 20000))) for loc in seq])


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.get_closest_marker("acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _ACCEPTANCE.append((rep.passed, doc))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ok, doc in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {doc}")
