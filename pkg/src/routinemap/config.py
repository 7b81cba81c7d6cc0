"""Pipeline configuration: a YAML file whose every key has a CLI override.

Example::

    input: [events.csv]
    timezone: Europe/Madrid
    day_close: midnight          # or last_event
    levels: {low: 4000, high: 10000}
    qt: {similarity: 0.25, join: 0.05, mode: distance, growth: exact}
    similarity: {edge_weight: 0.5, node_weight: 0.5}
    render: {palette: RdBu}
    report: {top_k: 5}
    output: out
    seed: 42
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError
from .eventlog import DAY_CLOSE_MODES, _zone
from .grouping import LevelThresholds
from .modelsim import check_weights
from .qtclust import QtParams
from .render import PALETTES


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[str, ...] = ()
    timezone: str = "UTC"
    day_close: str = "midnight"
    levels: LevelThresholds = field(default_factory=LevelThresholds)
    qt: QtParams = field(default_factory=QtParams)
    edge_weight: float = 0.5
    node_weight: float = 0.5
    palette: str = "RdBu"
    top_k: int = 5
    output: str | None = None
    seed: int = 0

    def __post_init__(self):
        _zone(self.timezone)
        if self.day_close not in DAY_CLOSE_MODES:
            raise ConfigError(f"day_close must be one of {DAY_CLOSE_MODES}")
        check_weights(self.edge_weight, self.node_weight)
        if self.palette not in PALETTES:
            raise ConfigError(f"unknown palette {self.palette!r}; choose from {sorted(PALETTES)}")
        if self.top_k < 1:
            raise ConfigError("report.top_k must be >= 1")

    def check_inputs(self) -> None:
        if not self.inputs:
            raise ConfigError("no input files given")
        for p in self.inputs:
            if not Path(p).is_file():
                raise ConfigError(f"input file not found: {p}")


def _num(value, kind, key):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be {kind.__name__}, got {value!r}") from None


def config_from_mapping(doc: Mapping[str, Any] | None, overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    """Build a config from a parsed YAML document plus flat overrides
    (``levels.low``, ``qt.similarity``...); overrides that are None are ignored."""
    doc = dict(doc or {})
    flat: dict[str, Any] = {}
    for key, value in doc.items():
        if isinstance(value, Mapping):
            for sub, v in value.items():
                flat[f"{key}.{sub}"] = v
        else:
            flat[key] = value
    flat.update({k: v for k, v in (overrides or {}).items() if v is not None})

    known = {
        "input", "timezone", "day_close", "levels.low", "levels.high", "qt.similarity", "qt.join",
        "qt.mode", "qt.growth", "similarity.edge_weight", "similarity.node_weight", "render.palette",
        "report.top_k", "output", "seed",
    }
    unknown = sorted(k for k in flat if k not in known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")

    inputs = flat.get("input", ())
    if isinstance(inputs, (str, Path)):
        inputs = (inputs,)
    try:
        return PipelineConfig(
            inputs=tuple(str(p) for p in inputs),
            timezone=str(flat.get("timezone", "UTC")),
            day_close=str(flat.get("day_close", "midnight")),
            levels=LevelThresholds(
                _num(flat.get("levels.low", 4000), int, "levels.low"),
                _num(flat.get("levels.high", 10000), int, "levels.high"),
            ),
            qt=QtParams(
                _num(flat.get("qt.similarity", 0.25), float, "qt.similarity"),
                _num(flat.get("qt.join", 0.05), float, "qt.join"),
                str(flat.get("qt.mode", "distance")),
                str(flat.get("qt.growth", "exact")),
            ),
            edge_weight=_num(flat.get("similarity.edge_weight", 0.5), float, "similarity.edge_weight"),
            node_weight=_num(flat.get("similarity.node_weight", 0.5), float, "similarity.node_weight"),
            palette=str(flat.get("render.palette", "RdBu")),
            top_k=_num(flat.get("report.top_k", 5), int, "report.top_k"),
            output=None if flat.get("output") is None else str(flat["output"]),
            seed=_num(flat.get("seed", 0), int, "seed"),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    doc = None
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
        if doc is not None and not isinstance(doc, Mapping):
            raise ConfigError("config file must hold a mapping")
    return config_from_mapping(doc, overrides)


def with_inputs(cfg: PipelineConfig, inputs) -> PipelineConfig:
    return replace(cfg, inputs=tuple(str(p) for p in inputs)) if inputs else cfg
