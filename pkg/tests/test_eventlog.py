import gzip
from collections import Counter
from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from routinemap.errors import AmbiguityError, ConfigError, DataError, EmptyInputError, ParseError
from routinemap.eventlog import (
    DayTrace,
    LocationEvent,
    StepEvent,
    parse_events,
    parse_instant,
    read_events,
    segment_days,
    trace_rows,
    write_csv,
)

HDR = "timestamp,subject,stream,value\n"
UTC = timezone.utc


def at(text):
    return datetime.fromisoformat(text).replace(tzinfo=UTC)


def loc(text, where, subject="p1"):
    return LocationEvent(at(text), where, subject)


def dwells(trace):
    return [v.dwell for v in trace.events]


# --------------------------------------------------------------- parsing


def test_single_row():
    locs, steps = parse_events(HDR + "2020-01-05T08:00:00Z,p1,location,Bedroom\n")
    assert locs == [LocationEvent(at("2020-01-05T08:00:00"), "Bedroom", "p1")]
    assert steps == []


def test_negative_steps_reports_line():
    with pytest.raises(ParseError) as err:
        parse_events(HDR + "2020-01-05T08:00:00Z,p1,steps,-5\n")
    assert err.value.line == 2


def test_mixed_streams_keep_order():
    text = HDR + (
        "2020-01-05T08:00:00Z,p1,location,Bedroom\n"
        "2020-01-05T08:10:00Z,p1,steps,120\n"
        "2020-01-05T07:00:00Z,p1,location,Kitchen\n"
    )
    locs, steps = parse_events(text.encode())
    assert [e.location for e in locs] == ["Bedroom", "Kitchen"]
    assert steps == [StepEvent(at("2020-01-05T08:10:00"), 120, "p1")]


@pytest.mark.parametrize(
    "row, line",
    [
        ("2020-01-05 08:00,p1,location,Bedroom", 2),  # no offset
        ("yesterday,p1,location,Bedroom", 2),
        ("2020-01-05T08:00:00Z,p1,heart,70", 2),
        ("2020-01-05T08:00:00Z,p1,steps,1.5", 2),
        ("2020-01-05T08:00:00Z,p1,location,   ", 2),
    ],
)
def test_bad_rows(row, line):
    with pytest.raises(ParseError) as err:
        parse_events(HDR + row + "\n")
    assert err.value.line == line


def test_error_line_counts_past_good_rows():
    text = HDR + "2020-01-05T08:00:00Z,p1,location,Bedroom\n" + "2020-01-05T09:00:00Z,p1,steps,x\n"
    with pytest.raises(ParseError) as err:
        parse_events(text)
    assert err.value.line == 3


@pytest.mark.parametrize("text", ["", HDR])
def test_empty_input_is_distinct(text):
    with pytest.raises(EmptyInputError):
        parse_events(text)


def test_offsets_are_honoured():
    assert parse_instant("2020-01-05T10:00:00+02:00") == at("2020-01-05T08:00:00")


def test_read_gzip(tmp_path):
    p = tmp_path / "ev.csv.gz"
    p.write_bytes(gzip.compress((HDR + "2020-01-05T08:00:00Z,p1,location,Bedroom\n").encode()))
    locs, _ = read_events(p)
    assert locs[0].location == "Bedroom"


# ----------------------------------------------------------- segmentation


def test_single_day_dwells():
    days = segment_days(
        [loc("2020-01-05T08:00:00", "Bedroom"), loc("2020-01-05T09:30:00", "Kitchen"), loc("2020-01-05T10:00:00", "Bedroom")]
    )
    assert len(days) == 1
    assert dwells(days[0]) == [5400, 1800, 50400]
    assert [v.location for v in days[0].events] == ["Bedroom", "Kitchen", "Bedroom"]


def test_midnight_split():
    days = segment_days([loc("2020-01-05T23:00:00", "Bedroom"), loc("2020-01-06T01:00:00", "Kitchen")])
    jan5, jan6 = days
    assert jan5.date == date(2020, 1, 5)
    assert [(v.location, v.dwell) for v in jan5.events] == [("Bedroom", 3600)]
    assert jan6.events[0].location == "Bedroom"
    assert jan6.events[0].entry == int(at("2020-01-06T00:00:00").timestamp())
    assert jan6.events[0].dwell == 3600
    assert jan6.events[1].location == "Kitchen"


def test_coalesce_adjacent_duplicates():
    (day,) = segment_days(
        [loc("2020-01-05T08:00:00", "Bedroom"), loc("2020-01-05T09:00:00", "Bedroom"), loc("2020-01-05T10:00:00", "Kitchen")]
    )
    assert [v.location for v in day.events] == ["Bedroom", "Kitchen"]
    assert day.events[0].entry == int(at("2020-01-05T08:00:00").timestamp())
    assert day.events[0].dwell == 7200


def test_last_event_close_drops_open_reading():
    (day,) = segment_days(
        [loc("2020-01-05T08:00:00", "Bedroom"), loc("2020-01-05T09:00:00", "Kitchen")], day_close="last_event"
    )
    assert [(v.location, v.dwell) for v in day.events] == [("Bedroom", 3600)]


def test_ambiguous_duplicate_timestamp():
    with pytest.raises(AmbiguityError):
        segment_days([loc("2020-01-05T08:00:00", "Bedroom"), loc("2020-01-05T08:00:00", "Kitchen")])


def test_identical_duplicate_is_harmless():
    a = loc("2020-01-05T08:00:00", "Bedroom")
    assert segment_days([a, a]) == segment_days([a])


def test_no_locations_gives_no_days():
    assert segment_days([], [StepEvent(at("2020-01-05T08:00:00"), 10, "p1")]) == []


def test_two_subjects_rejected():
    with pytest.raises(DataError):
        segment_days([loc("2020-01-05T08:00:00", "Bedroom"), loc("2020-01-05T09:00:00", "Kitchen", "p2")])


def test_unknown_zone_is_config_error():
    with pytest.raises(ConfigError):
        segment_days([loc("2020-01-05T08:00:00", "Bedroom")], zone="Mars/Olympus")


def test_steps_summed_per_local_day():
    ev = [loc("2020-01-05T08:00:00", "Bedroom")]
    st_ = [
        StepEvent(at("2020-01-05T09:00:00"), 100, "p1"),
        StepEvent(at("2020-01-05T22:30:00"), 50, "p1"),
    ]
    (d,) = segment_days(ev, st_, zone="UTC")
    assert d.step_total == 150
    # at UTC+2 the 22:30 reading belongs to the next local day
    days = segment_days(ev, st_, zone="Europe/Athens")
    assert days[0].step_total == 100


def test_dst_day_is_23_hours():
    # Europe/Madrid springs forward on 2020-03-29
    (d,) = segment_days([LocationEvent(parse_instant("2020-03-29T00:00:00+01:00"), "Bedroom", "p1")], zone="Europe/Madrid")
    assert d.span == 23 * 3600


def test_trace_dict_round_trip():
    (d,) = segment_days([loc("2020-01-05T08:00:00", "Bedroom"), loc("2020-01-05T09:00:00", "Kitchen")])
    assert DayTrace.from_dict(d.to_dict()) == d


# ------------------------------------------------------------- properties

ROOMS = ["Bedroom", "Kitchen", "LivingRoom", "Bathroom", "Entrance"]
T0 = int(at("2020-01-05T00:00:00").timestamp())


@st.composite
def event_logs(draw):
    n = draw(st.integers(1, 25))
    gaps = draw(st.lists(st.integers(1, 40 * 3600), min_size=n, max_size=n))
    rooms = draw(st.lists(st.sampled_from(ROOMS), min_size=n, max_size=n))
    t = T0 + draw(st.integers(0, 86399))
    out = []
    for g, r in zip(gaps, rooms):
        out.append(LocationEvent(datetime.fromtimestamp(t, UTC), r, "p1"))
        t += g
    steps = [
        StepEvent(e.timestamp, c, "p1")
        for e, c in zip(out, draw(st.lists(st.integers(0, 3000), min_size=n, max_size=n)))
    ]
    return out, steps


def _resegment(days, zone="UTC"):
    return segment_days(*parse_events(write_csv(trace_rows(days))), zone=zone)


@settings(max_examples=150, deadline=None)
@given(event_logs())
def test_round_trip(log):
    days = segment_days(*log)
    assert _resegment(days) == days


@settings(max_examples=150, deadline=None)
@given(event_logs())
def test_gap_free_span(log):
    for d in segment_days(*log):
        assert sum(dwells(d)) == d.span
        assert all(v.dwell > 0 for v in d.events)
        entries = [v.entry for v in d.events]
        assert entries == sorted(set(entries))
        assert all(a.location != b.location for a, b in zip(d.events, d.events[1:]))


def _per_location(days):
    c = Counter()
    for d in days:
        for v in d.events:
            c[v.location] += v.dwell
    return c


@settings(max_examples=100, deadline=None)
@given(event_logs(), st.sampled_from(["Europe/Madrid", "America/New_York", "Asia/Kolkata", "Pacific/Chatham"]))
def test_midnight_split_conservation(log, zone):
    locs, steps = log
    # close at the same absolute instant in both zones by pinning a final reading
    end = locs[-1].timestamp + timedelta(hours=1)
    locs = locs + [LocationEvent(end, "Closer", "p1")]
    a = _per_location(segment_days(locs, steps, zone="UTC", day_close="last_event"))
    b = _per_location(segment_days(locs, steps, zone=zone, day_close="last_event"))
    assert a == b


@settings(max_examples=100, deadline=None)
@given(event_logs())
def test_idempotent(log):
    once = segment_days(*log)
    twice = _resegment(once)
    assert _resegment(twice) == twice == once


def test_unchanging_log_closes_after_last_reading():
    ev = [loc(f"2020-01-{d:02d}T00:00:00", "Bedroom") for d in (5, 6, 7)]
    days = segment_days(ev)
    assert [d.date.day for d in days] == [5, 6, 7]
    assert all(dwells(d) == [86400] for d in days)
    days = segment_days(ev, day_close="last_event")
    assert [d.date.day for d in days] == [5, 6]
