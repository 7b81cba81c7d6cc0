"""Seeded synthetic location/step logs built from routine archetypes.

Every generated day starts at local midnight in the archetype's start
location and follows a first-order Markov walk over rooms until the day is
full.  Dwell times are log-normal (median, dispersion); daily step totals
are normal, truncated at zero, and written as four incremental rows.

Randomness comes from numpy's PCG64 bit generator (``np.random.default_rng``)
seeded once per call, and the draw order is fixed: day plan shuffle first,
then for each day in calendar order the step total, its split, and the
walk.  Identical inputs give byte-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from typing import Mapping, Sequence

import numpy as np
import yaml

from .errors import ConfigError
from .eventlog import _zone, format_instant, write_csv

NOISE = "noise"
MIN_DWELL = 60
STEP_HOURS = (6, 12, 18, 22)
NOISE_DWELL = (5400.0, 1.0)


@dataclass(frozen=True)
class Archetype:
    name: str
    locations: tuple[str, ...]
    transitions: Mapping[str, Mapping[str, float]]
    dwell: Mapping[str, tuple[float, float]]  # location -> (median seconds, log-sd)
    steps: tuple[float, float]  # mean, sd
    days: int
    start: str | None = None
    noise: bool = False

    def __post_init__(self):
        if not self.locations:
            raise ConfigError(f"archetype {self.name!r} has no locations")
        if self.days < 0:
            raise ConfigError(f"archetype {self.name!r}: days must be >= 0")
        if self.start is not None and self.start not in self.locations:
            raise ConfigError(f"archetype {self.name!r}: start {self.start!r} not in locations")
        for loc in self.locations:
            median, disp = self.dwell.get(loc, (None, None)) if not self.noise else NOISE_DWELL
            if median is None:
                raise ConfigError(f"archetype {self.name!r}: no dwell for {loc!r}")
            if median <= 0 or disp < 0:
                raise ConfigError(f"archetype {self.name!r}: dwell for {loc!r} must have median > 0")
            if self.noise or len(self.locations) == 1:
                continue
            row = self.transitions.get(loc)
            if not row:
                raise ConfigError(f"archetype {self.name!r}: no transition row for {loc!r}")
            if abs(sum(row.values()) - 1.0) > 1e-9:
                raise ConfigError(f"archetype {self.name!r}: row {loc!r} sums to {sum(row.values())}")
            for dst, p in row.items():
                if dst not in self.locations or p < 0:
                    raise ConfigError(f"archetype {self.name!r}: bad transition {loc!r}->{dst!r}")
        if self.steps[1] < 0:
            raise ConfigError(f"archetype {self.name!r}: step sd must be >= 0")

    @classmethod
    def from_dict(cls, d: Mapping) -> "Archetype":
        try:
            return cls(
                name=str(d["name"]),
                locations=tuple(d["locations"]),
                transitions={k: dict(v) for k, v in (d.get("transitions") or {}).items()},
                dwell={k: (float(v["median"]), float(v.get("dispersion", 0.0))) for k, v in (d.get("dwell") or {}).items()},
                steps=(float(d["steps"]["mean"]), float(d["steps"].get("sd", 0.0))),
                days=int(d["days"]),
                start=d.get("start"),
                noise=bool(d.get("noise", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed archetype {d.get('name', '?')!r}: {exc}") from exc


def load_archetypes(path) -> list[Archetype]:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    items = doc.get("archetypes", doc) if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise ConfigError("archetype file must hold a list under 'archetypes'")
    return [Archetype.from_dict(a) for a in items]


@dataclass(frozen=True)
class DayPlan:
    date: date
    archetype: str


def plan_days(
    archetypes: Sequence[Archetype], seed: int, noise_days: int = 0, start_date: date = date(2020, 1, 1)
) -> list[DayPlan]:
    return _plan(archetypes, np.random.default_rng(seed), noise_days, start_date)


def _plan(archetypes, rng, noise_days, start_date):
    names = [a.name for a in archetypes for _ in range(a.days)] + [NOISE] * noise_days
    order = rng.permutation(len(names))
    return [DayPlan(start_date + timedelta(days=i), names[j]) for i, j in enumerate(order)]


def _walk(arch: Archetype, rng, locations: Sequence[str], day_len: int):
    """Yield (offset seconds, location) entries covering [0, day_len)."""
    if arch.noise:
        loc = locations[rng.integers(len(locations))]
    else:
        loc = arch.start or arch.locations[0]
    t = 0
    prev = None
    while t < day_len:
        if loc != prev:
            yield t, loc
            prev = loc
        median, disp = NOISE_DWELL if arch.noise else arch.dwell[loc]
        t += max(MIN_DWELL, int(round(float(rng.lognormal(np.log(median), disp)))))
        if len(locations) == 1:
            continue
        if arch.noise:
            others = [l for l in locations if l != loc]
            loc = others[rng.integers(len(others))]
        else:
            row = arch.transitions[loc]
            dests = sorted(row)
            p = np.array([row[d] for d in dests])
            loc = dests[rng.choice(len(dests), p=p / p.sum())]


def generate_rows(
    archetypes: Sequence[Archetype],
    seed: int,
    noise_days: int = 0,
    start_date: date = date(2020, 1, 1),
    zone="UTC",
    subject: str = "p1",
) -> tuple[list[tuple[str, str, str, str]], list[DayPlan]]:
    if not archetypes and noise_days == 0:
        raise ConfigError("nothing to generate")
    tz = _zone(zone)
    rng = np.random.default_rng(seed)
    by_name = {a.name: a for a in archetypes}
    if NOISE in by_name:
        raise ConfigError(f"archetype name {NOISE!r} is reserved")
    union = tuple(sorted({l for a in archetypes for l in a.locations}))
    if noise_days and not union:
        raise ConfigError("noise days need at least one archetype to take locations from")

    plan = _plan(archetypes, rng, noise_days, start_date)
    rows = []
    for day in plan:
        if day.archetype == NOISE:
            src = archetypes[int(rng.integers(len(archetypes)))]
            arch = Archetype(NOISE, union, {}, {}, src.steps, 1, noise=True)
            locs = union
        else:
            arch = by_name[day.archetype]
            locs = arch.locations
        midnight = int(datetime.combine(day.date, time(0), tzinfo=tz).timestamp())
        nxt = int(datetime.combine(day.date + timedelta(days=1), time(0), tzinfo=tz).timestamp())

        total = max(0, int(round(float(rng.normal(arch.steps[0], arch.steps[1])))))
        parts = rng.multinomial(total, [1 / len(STEP_HOURS)] * len(STEP_HOURS))
        step_rows = [
            (int(datetime.combine(day.date, time(h), tzinfo=tz).timestamp()), str(int(c)))
            for h, c in zip(STEP_HOURS, parts)
        ]
        loc_rows = [(midnight + off, loc) for off, loc in _walk(arch, rng, locs, nxt - midnight)]

        merged = [(t, 0, "location", v) for t, v in loc_rows] + [(t, 1, "steps", v) for t, v in step_rows]
        merged.sort(key=lambda r: (r[0], r[1]))
        rows.extend((format_instant(t), subject, stream, v) for t, _, stream, v in merged)
    return rows, plan


def generate(
    archetypes: Sequence[Archetype],
    seed: int,
    noise_days: int = 0,
    start_date: date = date(2020, 1, 1),
    zone="UTC",
    subject: str = "p1",
) -> bytes:
    """Event CSV bytes for the planned days; see the module docstring."""
    rows, _ = generate_rows(archetypes, seed, noise_days, start_date, zone, subject)
    return write_csv(rows)
