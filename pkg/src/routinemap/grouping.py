"""Physical-activity levels from daily step totals."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError
from .eventlog import DayTrace


class ActivityLevel(enum.IntEnum):
    Insufficient = 0
    Sufficient = 1
    Desirable = 2

    @property
    def slug(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class LevelThresholds:
    low: int = 4000
    high: int = 10000

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise ConfigError(f"need 0 < levels.low < levels.high, got low={self.low} high={self.high}")


LevelGroups = dict  # ActivityLevel -> list of day ids, chronological


def classify_day(step_total: int, thresholds: LevelThresholds = LevelThresholds()) -> ActivityLevel:
    # Sufficient is the closed band [low, high]
    if step_total < thresholds.low:
        return ActivityLevel.Insufficient
    if step_total <= thresholds.high:
        return ActivityLevel.Sufficient
    return ActivityLevel.Desirable


def group_days(days: Iterable[DayTrace], thresholds: LevelThresholds = LevelThresholds()) -> LevelGroups:
    groups: LevelGroups = {level: [] for level in ActivityLevel}
    for day in sorted(days, key=lambda d: d.date):
        groups[classify_day(day.step_total, thresholds)].append(day.day_id)
    return groups


def groups_to_dict(groups: LevelGroups, thresholds: LevelThresholds | None = None) -> dict:
    out = {"groups": {level.name: list(groups[level]) for level in ActivityLevel}}
    if thresholds is not None:
        out["thresholds"] = {"low": thresholds.low, "high": thresholds.high}
    return out


def groups_from_dict(d: dict) -> LevelGroups:
    return {level: list(d["groups"].get(level.name, [])) for level in ActivityLevel}
