import json
import re
from pathlib import Path

import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from routinemap.errors import ConfigError
from routinemap.render import (
    PALETTES,
    edge_widths,
    hex_color,
    node_intensities,
    ratio_color,
    ratio_position,
    relative_ratios,
    render_absolute,
    render_relative,
)
from routinemap.tpa import END, START, StateStats, Tpa, discover_tpa

from conftest import make_trace

GOLDEN = Path(__file__).parent / "golden"
EXAMPLE = discover_tpa([make_trace("2020-01-05", [("Bedroom", 5400), ("Kitchen", 1800), ("Bedroom", 50400)])])
NEUTRAL = hex_color(PALETTES["RdBu"]["neutral"])


def parse(dot):
    graphs = pydot.graph_from_dot_data(dot)
    assert graphs and len(graphs) == 1
    return graphs[0]


def unquote(name):
    if len(name) >= 2 and name[0] == name[-1] == '"':
        name = name[1:-1]
    return re.sub(r'\\(["\\])', r"\1", name)


def node_names(g):
    return {unquote(n.get_name()) for n in g.get_nodes()} - {"node", "edge", "graph"}


def attrs(g, name):
    (n,) = g.get_node(f'"{name}"')
    return {k: v.strip('"') for k, v in n.get_attributes().items()}


def edge_attrs(g, a, b):
    (e,) = g.get_edge(f'"{a}"', f'"{b}"')
    return {k: v.strip('"') for k, v in e.get_attributes().items()}


def _tpa(dwell, transitions):
    return Tpa({k: StateStats(1, v, v * v) for k, v in dwell.items()}, transitions, 1)


def test_single_state():
    m = discover_tpa([make_trace("2020-01-05", [("Bedroom", 86400)])])
    assert node_intensities(m) == {"Bedroom": 1.0}
    assert edge_widths(m) == {(START, "Bedroom"): 1.0, ("Bedroom", END): 1.0}
    g = parse(render_absolute(m).dot)
    assert attrs(g, "Bedroom")["fillcolor"] == "#08306b"
    assert edge_attrs(g, START, "Bedroom")["penwidth"] == "1.00"


def test_ramp_positions():
    m = _tpa({"A": 75, "B": 25}, {(START, "A"): 1, ("A", "B"): 1, ("B", END): 1})
    got = node_intensities(m)
    assert got["A"] == 1.0
    assert got["B"] == pytest.approx(1 / 3)


def test_widths_scale_with_share():
    m = _tpa({"A": 1, "B": 1}, {(START, "A"): 1, ("A", "B"): 3, ("B", "A"): 1, ("A", END): 1})
    w = edge_widths(m)
    assert w[("A", "B")] == 5.0
    assert w[("B", "A")] == pytest.approx(1 + 4 / 3)


def test_absolute_golden():
    assert render_absolute(EXAMPLE).dot == (GOLDEN / "example_base.dot").read_text()


def test_absolute_nodes_and_labels():
    r = render_absolute(EXAMPLE)
    g = parse(r.dot)
    assert node_names(g) == {"Bedroom", "Kitchen", START, END}
    assert attrs(g, "Bedroom")["label"] == "Bedroom\\n7:45 x2"
    assert r.legend["palette"] == "Blues"
    assert json.loads(r.legend_json())["max_fraction"] == 0.96875


def test_double_share_is_half_way_to_above():
    base = _tpa({"Bedroom": 25, "Kitchen": 75}, {(START, "Bedroom"): 1, ("Bedroom", "Kitchen"): 1, ("Kitchen", END): 1})
    clus = _tpa({"Bedroom": 50, "Kitchen": 50}, {(START, "Bedroom"): 1, ("Bedroom", "Kitchen"): 1, ("Kitchen", END): 1})
    nodes, _ = relative_ratios(base, clus)
    assert nodes["Bedroom"] == 2.0
    assert ratio_position(2.0) == 0.5
    # (247,247,247) -> (178,24,43) halfway is (212.5, 135.5, 145)
    assert ratio_color(2.0) == "#d48891"
    g = parse(render_relative(base, clus).dot)
    assert attrs(g, "Bedroom")["fillcolor"] == "#d48891"


def test_clamp_and_anchors():
    pal = PALETTES["RdBu"]
    assert ratio_color(4.0) == ratio_color(100.0) == hex_color(pal["above"])
    assert ratio_color(0.25) == ratio_color(0.01) == hex_color(pal["below"])
    assert ratio_color(1.0) == NEUTRAL
    assert ratio_color(None) == hex_color(pal["new"])


def test_new_location_gets_new_colour():
    base = _tpa({"A": 1}, {(START, "A"): 1, ("A", END): 1})
    clus = _tpa({"A": 1, "Z": 1}, {(START, "A"): 1, ("A", "Z"): 1, ("Z", END): 1})
    g = parse(render_relative(base, clus, palette="PuOr").dot)
    new = hex_color(PALETTES["PuOr"]["new"])
    assert attrs(g, "Z")["fillcolor"] == new
    assert edge_attrs(g, "A", "Z")["color"] == new


def test_unknown_palette():
    with pytest.raises(ConfigError):
        render_relative(EXAMPLE, EXAMPLE, palette="Viridis")


def test_awkward_labels_parse():
    m = discover_tpa([make_trace("2020-01-05", [('Kid\'s "den"', 100), ("back\\room", 200), ("Küche", 300)])])
    for r in (render_absolute(m, 'odd "name"'), render_relative(m, m)):
        assert node_names(parse(r.dot)) == set(m.states) | {START, END}


ROOMS = ("Bedroom", "Kitchen", "LivingRoom", "Bathroom", "Entrance")


@st.composite
def models(draw):
    ts = []
    for k in range(draw(st.integers(1, 3))):
        rooms = draw(st.lists(st.sampled_from(ROOMS), min_size=1, max_size=8))
        seq = [r for i, r in enumerate(rooms) if i == 0 or r != rooms[i - 1]]
        ds = draw(st.lists(st.integers(1, 40000), min_size=len(seq), max_size=len(seq)))
        ts.append(make_trace(f"2020-01-{5 + k:02d}", list(zip(seq, ds))))
    return discover_tpa(ts)


@settings(max_examples=60, deadline=None)
@given(models())
def test_self_relative_is_neutral(m):
    g = parse(render_relative(m, m).dot)
    for loc in m.states:
        assert attrs(g, loc)["fillcolor"] == NEUTRAL
    for a, b in m.transitions:
        assert edge_attrs(g, a, b)["color"] == NEUTRAL
    assert render_relative(m, m).dot == render_relative(m, m).dot


@settings(max_examples=60, deadline=None)
@given(models(), models())
def test_dot_parses_and_node_set(base, clus):
    for r in (render_absolute(base), render_relative(base, clus)):
        g = parse(r.dot)
        expect = set(base.states) if r.legend["mode"] == "absolute" else set(clus.states)
        assert node_names(g) == expect | {START, END}


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_larger_ratio_never_below(r1, r2):
    lo, hi = sorted((r1, r2))
    assert ratio_position(lo) <= ratio_position(hi)
    if hi > lo and ratio_position(lo) >= 0:
        assert ratio_position(hi) >= 0
