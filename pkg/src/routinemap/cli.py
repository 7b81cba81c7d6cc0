"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
invariant violation.  Set ``ROUTINEMAP_LOG`` (e.g. ``INFO``) for progress
logging on stderr.
"""

from __future__ import annotations

import argparse
import gzip
import json
import logging
import os
import sys
from datetime import date
from importlib.resources import files
from pathlib import Path

from . import pipeline
from .config import load_config, with_inputs
from .errors import ConfigError, RoutineMapError
from .synth import generate_rows, load_archetypes
from .eventlog import write_csv

MIRROR_ARCHETYPES = files("routinemap") / "data" / "mirror.yaml"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file; flags override its values")


def _dir(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dir", default="out", help="artifact directory (default: out)")


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--timezone")
    p.add_argument("--day-close", choices=["midnight", "last_event"])
    p.add_argument("--low", type=int, help="levels.low (steps)")
    p.add_argument("--high", type=int, help="levels.high (steps)")
    p.add_argument("--similarity", type=float, help="QT similarity parameter")
    p.add_argument("--join", type=float, help="QT join fraction")
    p.add_argument("--mode", choices=["distance", "similarity"], help="how the similarity parameter is read")
    p.add_argument("--growth", choices=["exact", "greedy"])
    p.add_argument("--edge-weight", type=float)
    p.add_argument("--node-weight", type=float)
    p.add_argument("--palette")
    p.add_argument("--top-k", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="routinemap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic event log")
    _common(p)
    p.add_argument("--archetypes", help="archetype YAML (default: the packaged 146-day mirror set)")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-days", type=int, default=0)
    p.add_argument("--start-date", default="2020-01-01")
    p.add_argument("--timezone")
    p.add_argument("--subject", default="p1")
    p.add_argument("-o", "--out", required=True, help="CSV path; .gz compresses")
    p.add_argument("--truth", help="write the day -> archetype plan as JSON here")

    for name, help_ in [
        ("ingest", "parse event CSVs into days.json"),
        ("label", "assign activity levels -> groups.json"),
        ("discover", "discover one model per group -> tpas.json"),
        ("cluster", "QT-cluster days within each group -> clustering.json"),
        ("render", "write DOT process maps"),
        ("report", "write report.json and report.md"),
    ]:
        p = sub.add_parser(name, help=help_)
        _common(p)
        _dir(p)
        _model_flags(p)
        if name == "ingest":
            p.add_argument("--input", nargs="+", help="event CSV file(s)")

    p = sub.add_parser("pipeline", help="run every stage")
    _common(p)
    _model_flags(p)
    p.add_argument("--input", nargs="+", help="event CSV file(s)")
    p.add_argument("--out", help="output directory")
    return parser


def _overrides(args) -> dict:
    g = lambda name: getattr(args, name, None)
    return {
        "timezone": g("timezone"),
        "day_close": g("day_close"),
        "levels.low": g("low"),
        "levels.high": g("high"),
        "qt.similarity": g("similarity"),
        "qt.join": g("join"),
        "qt.mode": g("mode"),
        "qt.growth": g("growth"),
        "similarity.edge_weight": g("edge_weight"),
        "similarity.node_weight": g("node_weight"),
        "render.palette": g("palette"),
        "report.top_k": g("top_k"),
        "seed": g("seed"),
        "output": g("out") if args.command == "pipeline" else None,
    }


def _synth(args, cfg) -> None:
    path = args.archetypes or MIRROR_ARCHETYPES
    archetypes = load_archetypes(path)
    try:
        start = date.fromisoformat(args.start_date)
    except ValueError:
        raise ConfigError(f"bad --start-date {args.start_date!r}") from None
    rows, plan = generate_rows(archetypes, cfg.seed, args.noise_days, start, cfg.timezone, args.subject)
    data = write_csv(rows)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(gzip.compress(data, mtime=0) if out.suffix == ".gz" else data)
    if args.truth:
        truth = {p.date.isoformat(): p.archetype for p in plan}
        Path(args.truth).write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config, _overrides(args))
    cmd = args.command
    if cmd == "synth":
        _synth(args, cfg)
        return 0
    if cmd == "pipeline":
        cfg = with_inputs(cfg, args.input)
        out = pipeline.run_pipeline(cfg)
        print(out)
        return 0

    workdir = Path(args.dir)
    if cmd == "ingest":
        cfg = with_inputs(cfg, args.input)
        cfg.check_inputs()
        pipeline.run_stage(cmd, pipeline.ingest, workdir, cfg.inputs, cfg.timezone, cfg.day_close)
    elif cmd == "label":
        pipeline.run_stage(cmd, pipeline.label, workdir, cfg.levels)
    elif cmd == "discover":
        pipeline.run_stage(cmd, pipeline.discover, workdir)
    elif cmd == "cluster":
        pipeline.run_stage(cmd, pipeline.cluster, workdir, cfg.qt, cfg.edge_weight, cfg.node_weight)
    elif cmd == "render":
        pipeline.run_stage(cmd, pipeline.render, workdir, cfg.palette)
    elif cmd == "report":
        pipeline.run_stage(cmd, pipeline.report, workdir, cfg.top_k)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("ROUTINEMAP_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return run(argv)
    except RoutineMapError as exc:
        kind = "config error" if isinstance(exc, ConfigError) else "error"
        print(f"routinemap: {kind}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"routinemap: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
