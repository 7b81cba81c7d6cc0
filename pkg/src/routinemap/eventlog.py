"""Parsing and day segmentation of raw sensor CSV streams.

Input rows look like ``timestamp,subject,stream,value`` where ``stream`` is
``location`` (value is a room label) or ``steps`` (value is an incremental
step count).  Location readings are treated as event-on-change: a reading
marks the instant the subject entered a place, and the dwell there lasts
until the next reading.
"""

from __future__ import annotations

import csv
import gzip
import io
import re
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence
from zoneinfo import ZoneInfo

from .errors import AmbiguityError, ConfigError, DataError, EmptyInputError, ParseError

HEADER = ("timestamp", "subject", "stream", "value")
DAY_CLOSE_MODES = ("midnight", "last_event")

_INT_RE = re.compile(r"^[0-9]+$")


@dataclass(frozen=True)
class LocationEvent:
    timestamp: datetime
    location: str
    subject: str


@dataclass(frozen=True)
class StepEvent:
    timestamp: datetime
    count: int
    subject: str


class Visit(NamedTuple):
    location: str
    entry: int  # epoch seconds, UTC
    dwell: int  # seconds


@dataclass(frozen=True)
class DayTrace:
    date: date
    events: tuple[Visit, ...]
    step_total: int
    subject: str

    @property
    def day_id(self) -> str:
        return self.date.isoformat()

    @property
    def span(self) -> int:
        last = self.events[-1]
        return last.entry + last.dwell - self.events[0].entry

    def to_dict(self) -> dict:
        return {
            "date": self.day_id,
            "subject": self.subject,
            "step_total": self.step_total,
            "events": [
                {"location": v.location, "entry": format_instant(v.entry), "dwell": v.dwell}
                for v in self.events
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DayTrace":
        events = tuple(
            Visit(e["location"], _epoch(parse_instant(e["entry"])), int(e["dwell"]))
            for e in d["events"]
        )
        return cls(date.fromisoformat(d["date"]), events, int(d["step_total"]), d["subject"])


def parse_instant(text: str) -> datetime:
    """Parse an ISO 8601 instant with an explicit offset; return it in UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None or dt.utcoffset() is None:
        raise ValueError("timestamp has no UTC offset")
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_instant(epoch: int) -> str:
    return datetime.fromtimestamp(epoch, timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _epoch(dt: datetime) -> int:
    return int(dt.timestamp())


def _zone(zone) -> ZoneInfo | timezone:
    if isinstance(zone, str):
        if zone.upper() == "UTC":
            return timezone.utc
        try:
            return ZoneInfo(zone)
        except Exception as exc:
            raise ConfigError(f"unknown timezone {zone!r}") from exc
    return zone


def parse_events(data: bytes | str) -> tuple[list[LocationEvent], list[StepEvent]]:
    """Parse an event CSV into location and step events, keeping row order.

    Raises EmptyInputError when there is no header or no data row and
    ParseError (with the 1-based file line) for any malformed row.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(1, f"input is not UTF-8: {exc}") from exc
    else:
        text = data
    if not text.strip():
        raise EmptyInputError("input is empty")

    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(h.strip() for h in header) != HEADER:
        raise ParseError(1, f"expected header {','.join(HEADER)!r}, got {','.join(header)!r}")

    locations: list[LocationEvent] = []
    steps: list[StepEvent] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(line, f"expected 4 fields, got {len(row)}")
        ts_text, subject, stream, value = (c.strip() for c in row)
        try:
            ts = parse_instant(ts_text)
        except ValueError as exc:
            raise ParseError(line, f"bad timestamp {ts_text!r}: {exc}") from None
        if stream == "location":
            if not value:
                raise ParseError(line, "empty location label")
            locations.append(LocationEvent(ts, value, subject))
        elif stream == "steps":
            if not _INT_RE.match(value):
                raise ParseError(line, f"step count must be a non-negative integer, got {value!r}")
            steps.append(StepEvent(ts, int(value), subject))
        else:
            raise ParseError(line, f"unknown stream {stream!r}")

    if not locations and not steps:
        raise EmptyInputError("input has a header but no data rows")
    return locations, steps


def read_events(path: str | Path) -> tuple[list[LocationEvent], list[StepEvent]]:
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".gz":
        raw = gzip.decompress(raw)
    return parse_events(raw)


def _next_midnight(t: int, tz) -> int:
    local = datetime.fromtimestamp(t, tz)
    nxt = datetime.combine(local.date() + timedelta(days=1), time(0), tzinfo=tz)
    return _epoch(nxt)


def segment_days(
    locations: Sequence[LocationEvent],
    steps: Sequence[StepEvent] = (),
    zone="UTC",
    day_close: str = "midnight",
) -> list[DayTrace]:
    """Split a single subject's location stream into per-day traces.

    Every reading lasts until the next one; a stay that crosses local
    midnight is cut at the boundary.  The final reading of the whole log
    closes at the following local midnight (``day_close="midnight"``) or is
    dropped because it has no observed end (``day_close="last_event"``).
    Days that are fully covered by a stay that began earlier still get a
    trace, so total dwell per location does not depend on where midnight
    falls.
    """
    if day_close not in DAY_CLOSE_MODES:
        raise ConfigError(f"day_close must be one of {DAY_CLOSE_MODES}, got {day_close!r}")
    tz = _zone(zone)
    if not locations:
        return []
    subjects = {e.subject for e in locations} | {s.subject for s in steps}
    if len(subjects) > 1:
        raise DataError(f"segment_days expects one subject, got {sorted(subjects)}")
    subject = next(iter(subjects))

    readings: list[tuple[int, str]] = []
    for ev in sorted(locations, key=lambda e: e.timestamp):
        t = _epoch(ev.timestamp)
        if readings and readings[-1][0] == t:
            if readings[-1][1] == ev.location:
                continue
            raise AmbiguityError(
                f"{format_instant(t)}: conflicting locations {readings[-1][1]!r} and {ev.location!r}"
            )
        readings.append((t, ev.location))

    runs: list[tuple[int, str]] = []
    for t, loc in readings:
        if not runs or runs[-1][1] != loc:
            runs.append((t, loc))

    intervals = [(runs[i][0], runs[i + 1][0], runs[i][1]) for i in range(len(runs) - 1)]
    # the final run is closed relative to the last reading, not the run start
    t_run, loc_last = runs[-1]
    t_end = readings[-1][0]
    if day_close == "midnight":
        t_end = _next_midnight(t_end, tz)
    if t_end > t_run:
        intervals.append((t_run, t_end, loc_last))

    by_day: dict[date, list[Visit]] = defaultdict(list)
    for start, end, loc in intervals:
        while start < end:
            cut = min(end, _next_midnight(start, tz))
            by_day[datetime.fromtimestamp(start, tz).date()].append(Visit(loc, start, cut - start))
            start = cut

    step_totals: dict[date, int] = defaultdict(int)
    for s in steps:
        step_totals[s.timestamp.astimezone(tz).date()] += s.count

    return [
        DayTrace(day, tuple(by_day[day]), step_totals.get(day, 0), subject)
        for day in sorted(by_day)
    ]


def trace_rows(traces: Iterable[DayTrace]) -> list[tuple[str, str, str, str]]:
    """Serialize traces back to CSV rows: one location row per visit and a
    single steps row per day carrying the day's total."""
    rows = []
    for tr in traces:
        for i, v in enumerate(tr.events):
            rows.append((format_instant(v.entry), tr.subject, "location", v.location))
            if i == 0:
                rows.append((format_instant(v.entry), tr.subject, "steps", str(tr.step_total)))
    return rows


def write_csv(rows: Iterable[Sequence[str]]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")
