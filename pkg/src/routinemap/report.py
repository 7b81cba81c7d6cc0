"""Per-group and per-cluster summaries of discovered models."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping

from .errors import IntegrityError
from .grouping import ActivityLevel, LevelGroups
from .qtclust import Clustering
from .tpa import SENTINELS, Tpa, duration_profile

DEFAULT_TOP_K = 5


@dataclass
class ClusterReport:
    name: str
    size: int
    members: list[str]
    profile: dict[str, float]
    top_transitions: list[tuple[str, str, int]]
    delta_vs_base: dict[str, float]


@dataclass
class GroupReport:
    level: str
    day_count: int
    profile: dict[str, float] = field(default_factory=dict)
    hours_per_day: dict[str, float] = field(default_factory=dict)
    visits_per_day: dict[str, float] = field(default_factory=dict)
    top_transitions: list[tuple[str, str, int]] = field(default_factory=list)
    clusters: list[ClusterReport] = field(default_factory=list)
    outliers: list[str] = field(default_factory=list)

    @property
    def top_location(self) -> tuple[str, float] | None:
        if not self.profile:
            return None
        loc = max(sorted(self.profile), key=lambda k: self.profile[k])
        return loc, self.profile[loc]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["top_transitions"] = [list(t) for t in self.top_transitions]
        for c in d["clusters"]:
            c["top_transitions"] = [list(t) for t in c["top_transitions"]]
        return d


def top_transitions(tpa: Tpa, k: int = DEFAULT_TOP_K) -> list[tuple[str, str, int]]:
    """Most frequent location-to-location transitions, sentinels excluded."""
    body = [
        (a, b, c) for (a, b), c in tpa.transitions.items() if a not in SENTINELS and b not in SENTINELS
    ]
    body.sort(key=lambda t: (-t[2], t[0], t[1]))
    return body[:k]


def _check_integrity(level: ActivityLevel, days: list[str], clustering: Clustering) -> None:
    seen: dict[str, int] = {}
    for d in [m for c in clustering.clusters for m in c.members] + list(clustering.outliers):
        seen[d] = seen.get(d, 0) + 1
    dup = sorted(d for d, n in seen.items() if n > 1)
    if dup:
        raise IntegrityError(f"{level.name}: days assigned more than once: {dup}")
    extra = sorted(set(seen) - set(days))
    if extra:
        raise IntegrityError(f"{level.name}: cluster members not in group: {extra}")
    missing = sorted(set(days) - set(seen))
    if missing:
        raise IntegrityError(f"{level.name}: group days missing from clustering: {missing}")


def build_report(
    groups: LevelGroups,
    clusterings: Mapping[ActivityLevel, Clustering],
    base_tpas: Mapping[ActivityLevel, Tpa | None],
    k: int = DEFAULT_TOP_K,
) -> list[GroupReport]:
    reports = []
    for level in ActivityLevel:
        days = list(groups.get(level, []))
        rep = GroupReport(level.name, len(days))
        base = base_tpas.get(level)
        clustering = clusterings.get(level, Clustering([], []))
        _check_integrity(level, days, clustering)
        if base is not None:
            rep.profile = duration_profile(base)
            n = base.trace_count
            rep.hours_per_day = {loc: s.total_dwell / 3600 / n for loc, s in sorted(base.states.items())}
            rep.visits_per_day = {loc: s.visit_count / n for loc, s in sorted(base.states.items())}
            rep.top_transitions = top_transitions(base, k)
        for i, c in enumerate(clustering.clusters):
            prof = duration_profile(c.tpa) if c.tpa is not None else {}
            locs = sorted(set(prof) | set(rep.profile))
            rep.clusters.append(
                ClusterReport(
                    name=f"cluster-{i + 1}",
                    size=len(c.members),
                    members=list(c.members),
                    profile=prof,
                    top_transitions=top_transitions(c.tpa, k) if c.tpa is not None else [],
                    delta_vs_base={l: prof.get(l, 0.0) - rep.profile.get(l, 0.0) for l in locs},
                )
            )
        rep.outliers = list(clustering.outliers)
        reports.append(rep)
    return reports


def report_json(reports: list[GroupReport]) -> str:
    return json.dumps({"groups": [r.to_dict() for r in reports]}, indent=2, sort_keys=True) + "\n"


def _pct(x: float) -> str:
    return f"{100 * x:.1f}%"


def report_markdown(reports: list[GroupReport]) -> str:
    out = ["# Routine report", ""]
    for r in reports:
        out += [f"## {r.level} ({r.day_count} days)", ""]
        if not r.day_count:
            out += ["No days in this group.", ""]
            continue
        sizes = ", ".join(str(c.size) for c in r.clusters) or "none"
        out += [f"Clusters: {sizes}; outliers: {len(r.outliers)}.", ""]
        out += ["| Location | Share | Hours/day | Visits/day |", "|---|---:|---:|---:|"]
        for loc, share in sorted(r.profile.items(), key=lambda kv: (-kv[1], kv[0])):
            out.append(f"| {loc} | {_pct(share)} | {r.hours_per_day[loc]:.2f} | {r.visits_per_day[loc]:.2f} |")
        out.append("")
        if r.top_transitions:
            out.append("Most frequent transitions: " + "; ".join(f"{a} -> {b} ({c})" for a, b, c in r.top_transitions) + ".")
            out.append("")
        for c in r.clusters:
            out += [f"### {r.level} {c.name} ({c.size} days)", ""]
            out += ["| Location | Share | Change vs group |", "|---|---:|---:|"]
            for loc in sorted(c.delta_vs_base, key=lambda l: (-c.profile.get(l, 0.0), l)):
                out.append(f"| {loc} | {_pct(c.profile.get(loc, 0.0))} | {100 * c.delta_vs_base[loc]:+.1f} pp |")
            out.append("")
            if c.top_transitions:
                out.append("Most frequent transitions: " + "; ".join(f"{a} -> {b} ({n})" for a, b, n in c.top_transitions) + ".")
                out.append("")
        if r.outliers:
            out += [f"### {r.level} outliers", "", ", ".join(r.outliers), ""]
    return "\n".join(out)
