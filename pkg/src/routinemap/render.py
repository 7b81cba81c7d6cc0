"""DOT process maps.

Absolute maps shade each location by its share of total dwell on a
single-hue ramp and scale pen widths by transition share.  Relative maps
colour a cluster model against its group's base model on a diverging
palette: the ratio ``cluster_share / base_share`` is clamped to
``[1/4, 4]`` and placed on a log2 axis, so a ratio of 1 is neutral, 2 is
halfway to the "above" anchor and 4 is the anchor itself.  Elements the
base model lacks get the palette's "new" colour.

Palette anchors (RGB):

====== ============== =============== ============== ==============
name   below          neutral         above          new
====== ============== =============== ============== ==============
RdBu   33, 102, 172   247, 247, 247   178, 24, 43    77, 175, 74
PuOr   84, 39, 136    247, 247, 247   179, 88, 6     77, 175, 74
====== ============== =============== ============== ==============

The absolute ramp runs from (247, 251, 255) to (8, 48, 107).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .tpa import END, SENTINELS, START, Tpa, duration_profile, edge_shares

PALETTES = {
    "RdBu": {"below": (33, 102, 172), "neutral": (247, 247, 247), "above": (178, 24, 43), "new": (77, 175, 74)},
    "PuOr": {"below": (84, 39, 136), "neutral": (247, 247, 247), "above": (179, 88, 6), "new": (77, 175, 74)},
}
RAMP = ((247, 251, 255), (8, 48, 107))
RATIO_CLAMP = (0.25, 4.0)
MIN_WIDTH, MAX_WIDTH = 1.0, 5.0
SENTINEL_FILL = "#d9d9d9"


@dataclass(frozen=True)
class RenderedGraph:
    dot: str
    legend: dict = field(default_factory=dict)

    def legend_json(self) -> str:
        return json.dumps(self.legend, indent=2, sort_keys=True) + "\n"


def hex_color(rgb) -> str:
    return "#{:02x}{:02x}{:02x}".format(*(int(round(c)) for c in rgb))


def _lerp(a, b, t: float):
    return tuple(x + (y - x) * t for x, y in zip(a, b))


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _quote(s: str) -> str:
    return '"' + _esc(s) + '"'


def _hmm(seconds: float) -> str:
    minutes = int(round(seconds / 60))
    return f"{minutes // 60}:{minutes % 60:02d}"


def node_intensities(tpa: Tpa) -> dict[str, float]:
    """Position of each location on the absolute ramp, 0 = lightest."""
    prof = duration_profile(tpa)
    top = max(prof.values(), default=0.0)
    return {loc: (f / top if top > 0 else 0.0) for loc, f in prof.items()}


def edge_widths(tpa: Tpa) -> dict[tuple[str, str], float]:
    """Sentinel edges are drawn at the minimum width; the others scale
    linearly with their share, the busiest edge getting the maximum."""
    shares = edge_shares(tpa)
    body = [s for (a, b), s in shares.items() if a not in SENTINELS and b not in SENTINELS]
    top = max(body, default=0.0)
    out = {}
    for (a, b), s in shares.items():
        if a in SENTINELS or b in SENTINELS or top <= 0:
            out[(a, b)] = MIN_WIDTH
        else:
            out[(a, b)] = MIN_WIDTH + (MAX_WIDTH - MIN_WIDTH) * s / top
    return out


def ratio_position(ratio: float) -> float:
    """Map a share ratio to [-1, 1]; 0 is neutral."""
    lo, hi = RATIO_CLAMP
    r = min(hi, max(lo, ratio))
    return math.log2(r) / math.log2(hi)


def ratio_color(ratio: float | None, palette: str = "RdBu") -> str:
    pal = _palette(palette)
    if ratio is None:
        return hex_color(pal["new"])
    pos = ratio_position(ratio)
    if pos >= 0:
        return hex_color(_lerp(pal["neutral"], pal["above"], pos))
    return hex_color(_lerp(pal["neutral"], pal["below"], -pos))


def _palette(name: str) -> dict:
    try:
        return PALETTES[name]
    except KeyError:
        raise ConfigError(f"unknown palette {name!r}; choose from {sorted(PALETTES)}") from None


def _header(name: str, title: str) -> list[str]:
    return [
        f"digraph {_quote(name)} {{",
        f"  graph [rankdir=LR, fontname=Helvetica, label={_quote(title)}];",
        '  node [shape=box, style="rounded,filled", fontname=Helvetica];',
        "  edge [fontname=Helvetica, fontsize=10];",
        f'  {_quote(START)} [shape=circle, fillcolor="{SENTINEL_FILL}"];',
        f'  {_quote(END)} [shape=doublecircle, fillcolor="{SENTINEL_FILL}"];',
    ]


def _node_label(tpa: Tpa, loc: str) -> str:
    s = tpa.states[loc]
    return f"{_esc(loc)}\\n{_hmm(s.mean_dwell)} x{s.visit_count}"


def render_absolute(tpa: Tpa, name: str = "base", title: str | None = None) -> RenderedGraph:
    lines = _header(name, title or name)
    for loc, t in node_intensities(tpa).items():
        fill = _lerp(*RAMP, t)
        font = "#ffffff" if t > 0.6 else "#000000"
        lines.append(
            f"  {_quote(loc)} [fillcolor=\"{hex_color(fill)}\", fontcolor=\"{font}\", "
            f"label=\"{_node_label(tpa, loc)}\"];"
        )
    widths = edge_widths(tpa)
    for (a, b), count in sorted(tpa.transitions.items()):
        style = ", style=dashed" if a in SENTINELS or b in SENTINELS else ""
        lines.append(f"  {_quote(a)} -> {_quote(b)} [penwidth={widths[(a, b)]:.2f}, label=\"{count}\"{style}];")
    lines.append("}")
    prof = duration_profile(tpa)
    legend = {
        "mode": "absolute",
        "palette": "Blues",
        "anchors": {"lightest": hex_color(RAMP[0]), "darkest": hex_color(RAMP[1])},
        "max_fraction": max(prof.values(), default=0.0),
        "pen_width": [MIN_WIDTH, MAX_WIDTH],
    }
    return RenderedGraph("\n".join(lines) + "\n", legend)


def relative_ratios(base: Tpa, cluster: Tpa):
    """Share ratios of the cluster's nodes and edges against the base;
    ``None`` marks elements the base does not have."""
    bp, cp = duration_profile(base), duration_profile(cluster)
    be, ce = edge_shares(base), edge_shares(cluster)
    nodes = {loc: (cp[loc] / bp[loc] if bp.get(loc, 0.0) > 0 else None) for loc in cp}
    edges = {e: (ce[e] / be[e] if be.get(e, 0.0) > 0 else None) for e in ce}
    return nodes, edges


def render_relative(
    base: Tpa, cluster: Tpa, name: str = "cluster", title: str | None = None, palette: str = "RdBu"
) -> RenderedGraph:
    pal = _palette(palette)
    nodes, edges = relative_ratios(base, cluster)
    lines = _header(name, title or name)
    for loc, r in nodes.items():
        note = "new" if r is None else f"x{r:.2f}"
        label = f"{_node_label(cluster, loc)}\\n{note}"
        lines.append(f"  {_quote(loc)} [fillcolor=\"{ratio_color(r, palette)}\", label=\"{label}\"];")
    widths = edge_widths(cluster)
    for (a, b), count in sorted(cluster.transitions.items()):
        r = edges[(a, b)]
        style = ", style=dashed" if a in SENTINELS or b in SENTINELS else ""
        lines.append(
            f"  {_quote(a)} -> {_quote(b)} [color=\"{ratio_color(r, palette)}\", "
            f"penwidth={widths[(a, b)]:.2f}, label=\"{count}\"{style}];"
        )
    lines.append("}")
    legend = {
        "mode": "relative",
        "palette": palette,
        "anchors": {k: hex_color(v) for k, v in pal.items()},
        "clamp": list(RATIO_CLAMP),
        "scale": "log2",
    }
    return RenderedGraph("\n".join(lines) + "\n", legend)
