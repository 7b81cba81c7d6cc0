"""Timed process automata discovered from day traces.

A model has one state per location plus the ``Start``/``End`` sentinels
that absorb day boundaries.  Transitions count directly-follows pairs;
states aggregate the dwell of every visit.  All counters are integers, so
models over disjoint trace sets can be merged by summation without any
loss (see :func:`merge_tpas`).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DiscoveryError
from .eventlog import DayTrace

START = "Start"
END = "End"
SENTINELS = (START, END)


@dataclass(frozen=True)
class StateStats:
    visit_count: int
    total_dwell: int
    sum_sq_dwell: int

    @property
    def mean_dwell(self) -> float:
        return self.total_dwell / self.visit_count

    @property
    def dwell_variance(self) -> float:
        # population variance from exact integer moments
        n = self.visit_count
        return (n * self.sum_sq_dwell - self.total_dwell**2) / (n * n)

    def __add__(self, other: "StateStats") -> "StateStats":
        return StateStats(
            self.visit_count + other.visit_count,
            self.total_dwell + other.total_dwell,
            self.sum_sq_dwell + other.sum_sq_dwell,
        )


@dataclass(frozen=True)
class Tpa:
    states: Mapping[str, StateStats]
    transitions: Mapping[tuple[str, str], int]
    trace_count: int = field(default=0)

    @property
    def locations(self) -> list[str]:
        return sorted(self.states)

    @property
    def total_dwell(self) -> int:
        return sum(s.total_dwell for s in self.states.values())

    def inflow(self, state: str) -> int:
        return sum(c for (_, dst), c in self.transitions.items() if dst == state)

    def outflow(self, state: str) -> int:
        return sum(c for (src, _), c in self.transitions.items() if src == state)

    def to_dict(self) -> dict:
        return {
            "trace_count": self.trace_count,
            "states": [
                {
                    "label": label,
                    "visit_count": s.visit_count,
                    "total_dwell": s.total_dwell,
                    "sum_sq_dwell": s.sum_sq_dwell,
                    "mean_dwell": s.mean_dwell,
                    "dwell_variance": s.dwell_variance,
                }
                for label, s in sorted(self.states.items())
            ],
            "transitions": [
                {"source": src, "target": dst, "count": c}
                for (src, dst), c in sorted(self.transitions.items())
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Tpa":
        states = {
            s["label"]: StateStats(int(s["visit_count"]), int(s["total_dwell"]), int(s["sum_sq_dwell"]))
            for s in d["states"]
        }
        transitions = {(t["source"], t["target"]): int(t["count"]) for t in d["transitions"]}
        return cls(states, transitions, int(d["trace_count"]))


def discover_tpa(traces: Iterable[DayTrace]) -> Tpa:
    """Discover one model over a set of day traces.

    Raises DiscoveryError for an empty trace set or an empty trace.
    """
    visits: dict[str, list[int]] = {}
    transitions: Counter = Counter()
    n = 0
    for tr in traces:
        if not tr.events:
            raise DiscoveryError(f"trace {tr.day_id} has no events")
        n += 1
        prev = START
        for v in tr.events:
            if v.location in SENTINELS:
                raise DiscoveryError(f"location label {v.location!r} is reserved")
            visits.setdefault(v.location, []).append(v.dwell)
            transitions[(prev, v.location)] += 1
            prev = v.location
        transitions[(prev, END)] += 1
    if n == 0:
        raise DiscoveryError("cannot discover a model from zero traces")
    states = {
        loc: StateStats(len(ds), sum(ds), sum(d * d for d in ds))
        for loc, ds in sorted(visits.items())
    }
    return Tpa(states, dict(sorted(transitions.items())), n)


def merge_tpas(models: Sequence[Tpa]) -> Tpa:
    """Sum the counters of models discovered over disjoint trace sets."""
    if not models:
        raise DiscoveryError("nothing to merge")
    states: dict[str, StateStats] = {}
    transitions: Counter = Counter()
    for m in models:
        for loc, s in m.states.items():
            states[loc] = states[loc] + s if loc in states else s
        transitions.update(m.transitions)
    return Tpa(
        dict(sorted(states.items())),
        dict(sorted(transitions.items())),
        sum(m.trace_count for m in models),
    )


@dataclass(frozen=True)
class ReplayReport:
    fitness: float
    matched: int
    total: int
    missing: tuple[tuple[str, str], ...]


def trace_pairs(trace: DayTrace) -> list[tuple[str, str]]:
    seq = [START, *(v.location for v in trace.events), END]
    return list(zip(seq, seq[1:]))


def replay(tpa: Tpa, trace: DayTrace) -> ReplayReport:
    """Fraction of the trace's directly-follows pairs, sentinels included,
    that the model has a transition for."""
    pairs = trace_pairs(trace)
    missing = tuple(p for p in pairs if tpa.transitions.get(p, 0) <= 0)
    matched = len(pairs) - len(missing)
    return ReplayReport(matched / len(pairs), matched, len(pairs), missing)


def duration_profile(tpa: Tpa) -> dict[str, float]:
    total = tpa.total_dwell
    if total <= 0:
        return {}
    return {loc: s.total_dwell / total for loc, s in sorted(tpa.states.items())}


def edge_shares(tpa: Tpa) -> dict[tuple[str, str], float]:
    total = sum(tpa.transitions.values())
    if total <= 0:
        return {}
    return {e: c / total for e, c in sorted(tpa.transitions.items())}
