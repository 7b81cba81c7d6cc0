"""Pipeline stages.  Each stage reads the previous stage's files from an
artifact directory and writes its own, so stages can run one at a time or
all together through :func:`run_pipeline`.

Artifact tree::

    days.json  groups.json  tpas.json  clustering.json  report.json  report.md
    <group>/similarity.csv
    <group>/base.dot  <group>/base.legend.json
    <group>/cluster-<k>.dot  <group>/cluster-<k>.legend.json
"""

from __future__ import annotations

import json
import logging
import shutil
import tempfile
from pathlib import Path
from typing import Iterable

from .config import PipelineConfig
from .errors import ConfigError, InvariantError, RoutineMapError
from .eventlog import DayTrace, read_events, segment_days
from .grouping import ActivityLevel, LevelThresholds, group_days, groups_from_dict, groups_to_dict
from .qtclust import Clustering, QtParams, cluster_group
from .render import render_absolute, render_relative
from .report import build_report, report_json, report_markdown
from .tpa import END, START, Tpa, discover_tpa

log = logging.getLogger(__name__)

STAGES = ("ingest", "label", "discover", "cluster", "render", "report")


class StageError(RoutineMapError):
    def __init__(self, stage: str, cause: RoutineMapError):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))


def _read(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"missing artifact {path}; run the earlier stages first") from None


# ------------------------------------------------------------------ stages


def ingest(workdir: Path, inputs: Iterable[str], zone: str = "UTC", day_close: str = "midnight") -> list[DayTrace]:
    locations, steps = [], []
    for path in inputs:
        l, s = read_events(path)
        locations += l
        steps += s
    days = segment_days(locations, steps, zone, day_close)
    log.info("ingest: %d location rows, %d step rows -> %d days", len(locations), len(steps), len(days))
    _write(workdir / "days.json", dumps({"timezone": zone, "day_close": day_close, "days": [d.to_dict() for d in days]}))
    return days


def load_days(workdir: Path) -> list[DayTrace]:
    return [DayTrace.from_dict(d) for d in _read(workdir / "days.json")["days"]]


def label(workdir: Path, thresholds: LevelThresholds = LevelThresholds()):
    groups = group_days(load_days(workdir), thresholds)
    _write(workdir / "groups.json", dumps(groups_to_dict(groups, thresholds)))
    return groups


def check_tpa(tpa: Tpa, traces: list[DayTrace]) -> None:
    n = len(traces)
    if tpa.outflow(START) != n or tpa.inflow(END) != n:
        raise InvariantError("sentinel flow does not match the trace count")
    for loc, s in tpa.states.items():
        if not tpa.inflow(loc) == tpa.outflow(loc) == s.visit_count:
            raise InvariantError(f"flow conservation violated at {loc!r}")
    if tpa.total_dwell != sum(t.span for t in traces):
        raise InvariantError("state dwell totals do not match the trace spans")


def discover(workdir: Path) -> dict[ActivityLevel, Tpa | None]:
    by_id = {d.day_id: d for d in load_days(workdir)}
    groups = groups_from_dict(_read(workdir / "groups.json"))
    tpas: dict[ActivityLevel, Tpa | None] = {}
    for level in ActivityLevel:
        traces = [by_id[d] for d in groups[level]]
        if traces:
            tpas[level] = discover_tpa(traces)
            check_tpa(tpas[level], traces)
        else:
            tpas[level] = None
    _write(
        workdir / "tpas.json",
        dumps({"groups": {lvl.name: (m.to_dict() if m else None) for lvl, m in tpas.items()}}),
    )
    return tpas


def load_tpas(workdir: Path) -> dict[ActivityLevel, Tpa | None]:
    doc = _read(workdir / "tpas.json")["groups"]
    return {lvl: (Tpa.from_dict(doc[lvl.name]) if doc.get(lvl.name) else None) for lvl in ActivityLevel}


def cluster(
    workdir: Path, params: QtParams = QtParams(), edge_weight: float = 0.5, node_weight: float = 0.5
) -> dict[ActivityLevel, Clustering]:
    by_id = {d.day_id: d for d in load_days(workdir)}
    groups = groups_from_dict(_read(workdir / "groups.json"))
    out: dict[ActivityLevel, Clustering] = {}
    for level in ActivityLevel:
        traces = [by_id[d] for d in groups[level]]
        if not traces:
            out[level] = Clustering([], [], params)
            continue
        result, matrix = cluster_group(traces, params, edge_weight, node_weight)
        out[level] = result
        _write(workdir / level.slug / "similarity.csv", matrix.to_csv())
        log.info("cluster %s: sizes %s, %d outliers", level.name, [len(c) for c in result.clusters], len(result.outliers))
    doc = {
        "params": {"similarity_threshold": params.similarity_threshold, "join_fraction": params.join_fraction,
                   "mode": params.mode, "growth": params.growth},
        "weights": {"edge_weight": edge_weight, "node_weight": node_weight},
        "groups": {
            lvl.name: c.to_dict([f"{lvl.slug}/cluster-{k + 1}" for k in range(len(c.clusters))])
            for lvl, c in out.items()
        },
    }
    _write(workdir / "clustering.json", dumps(doc))
    return out


def load_clusterings(workdir: Path) -> dict[ActivityLevel, Clustering]:
    doc = _read(workdir / "clustering.json")["groups"]
    return {lvl: Clustering.from_dict(doc[lvl.name]) for lvl in ActivityLevel if lvl.name in doc}


def render(workdir: Path, palette: str = "RdBu") -> list[Path]:
    tpas = load_tpas(workdir)
    clusterings = load_clusterings(workdir)
    written = []
    for level in ActivityLevel:
        base = tpas.get(level)
        if base is None:
            continue
        outputs = [("base", render_absolute(base, f"{level.name} base", f"{level.name}: all days"))]
        for k, c in enumerate(clusterings.get(level, Clustering([], [])).clusters):
            name = f"cluster-{k + 1}"
            title = f"{level.name} {name} ({len(c)} days) vs base"
            outputs.append((name, render_relative(base, c.tpa, f"{level.name} {name}", title, palette)))
        for name, graph in outputs:
            dot = workdir / level.slug / f"{name}.dot"
            _write(dot, graph.dot)
            _write(workdir / level.slug / f"{name}.legend.json", graph.legend_json())
            written.append(dot)
    return written


def report(workdir: Path, top_k: int = 5):
    groups = groups_from_dict(_read(workdir / "groups.json"))
    reports = build_report(groups, load_clusterings(workdir), load_tpas(workdir), top_k)
    _write(workdir / "report.json", report_json(reports))
    _write(workdir / "report.md", report_markdown(reports))
    return reports


# ---------------------------------------------------------------- pipeline


def run_stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RoutineMapError as exc:
        raise StageError(stage, exc) from exc


def run_all(workdir: Path, cfg: PipelineConfig) -> None:
    run_stage("ingest", ingest, workdir, cfg.inputs, cfg.timezone, cfg.day_close)
    run_stage("label", label, workdir, cfg.levels)
    run_stage("discover", discover, workdir)
    run_stage("cluster", cluster, workdir, cfg.qt, cfg.edge_weight, cfg.node_weight)
    run_stage("render", render, workdir, cfg.palette)
    run_stage("report", report, workdir, cfg.top_k)


def _replaceable(out: Path) -> bool:
    return not out.exists() or (out.is_dir() and (not any(out.iterdir()) or (out / "days.json").exists()))


def run_pipeline(cfg: PipelineConfig, output: str | Path | None = None) -> Path:
    """Run every stage into a scratch directory and move the finished tree
    to the output directory; nothing is left behind on failure."""
    out = Path(output or cfg.output or "out")
    cfg.check_inputs()
    if not _replaceable(out):
        raise ConfigError(f"output directory {out} exists and does not hold a previous run")
    out.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".routinemap-", dir=out.parent))
    try:
        run_all(scratch, cfg)
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    scratch.chmod(0o755)
    if out.exists():
        shutil.rmtree(out)
    scratch.rename(out)
    return out
