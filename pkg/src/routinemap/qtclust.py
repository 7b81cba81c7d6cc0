"""Quality Threshold clustering of per-day models.

Each round, every remaining day seeds a candidate cluster; the largest
candidate wins (ties go to the earliest seed), its members leave the pool,
and the rounds repeat until the pool is empty.  Clusters below the minimum
size ``max(2, ceil(join_fraction * N))`` are then dissolved into outliers.

Two candidate constructions are available.  ``exact`` (default) takes the
largest set of days containing the seed whose pairwise similarities all
pass the admission threshold, preferring a higher minimum similarity and
then the earliest member list on ties; this is a branch-and-bound clique
search, exponential in the worst case but fast on the block-structured
matrices real routines produce.  ``greedy`` is the classic heuristic that
repeatedly adds the day with the best minimum similarity to the current
members, ties going to the earliest day.

The admission threshold follows ``QtParams.mode``: in ``distance`` mode the
parameter is the largest allowed dissimilarity, so a pair is admitted when
``similarity >= 1 - similarity_threshold``; in ``similarity`` mode the pair
is admitted when ``similarity >= similarity_threshold``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError, DataError
from .eventlog import DayTrace
from .modelsim import SimilarityMatrix, similarity_matrix
from .tpa import Tpa, discover_tpa

GROWTH = {"exact": _kernels.GROWTH_EXACT, "greedy": _kernels.GROWTH_GREEDY}
MODES = ("distance", "similarity")


@dataclass(frozen=True)
class QtParams:
    similarity_threshold: float = 0.25
    join_fraction: float = 0.05
    mode: str = "distance"
    growth: str = "exact"

    def __post_init__(self):
        for name in ("similarity_threshold", "join_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.growth not in GROWTH:
            raise ConfigError(f"growth must be one of {tuple(GROWTH)}, got {self.growth!r}")

    @property
    def admission(self) -> float:
        """Minimum pairwise similarity for two days to share a cluster."""
        if self.mode == "distance":
            return 1.0 - self.similarity_threshold
        return self.similarity_threshold

    def min_cluster_size(self, n: int) -> int:
        # round() guards against 0.05 * 60 == 3.0000000000000004
        return max(2, math.ceil(round(self.join_fraction * n, 9)))


@dataclass
class Cluster:
    members: list[str]
    tpa: Tpa | None = None

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class Clustering:
    clusters: list[Cluster]
    outliers: list[str]
    params: QtParams = field(default_factory=QtParams)

    def assignment(self) -> dict[str, int]:
        """Day id -> cluster index, -1 for outliers."""
        out = {d: -1 for d in self.outliers}
        for k, c in enumerate(self.clusters):
            out.update((d, k) for d in c.members)
        return out

    def to_dict(self, tpa_refs: Sequence[str] | None = None) -> dict:
        clusters = []
        for k, c in enumerate(self.clusters):
            entry = {"name": f"cluster-{k + 1}", "members": list(c.members), "size": len(c)}
            if tpa_refs is not None:
                entry["tpa"] = tpa_refs[k]
            if c.tpa is not None:
                entry["model"] = c.tpa.to_dict()
            clusters.append(entry)
        return {"clusters": clusters, "outliers": list(self.outliers), "params": asdict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "Clustering":
        clusters = [
            Cluster(list(c["members"]), Tpa.from_dict(c["model"]) if "model" in c else None)
            for c in d["clusters"]
        ]
        return cls(clusters, list(d["outliers"]), QtParams(**d.get("params", {})))


def qt_cluster(matrix: SimilarityMatrix, params: QtParams = QtParams()) -> Clustering:
    n = len(matrix.ids)
    if n == 0:
        return Clustering([], [], params)
    S = np.asarray(matrix.values, dtype=np.float64)
    if S.shape != (n, n):
        raise DataError(f"similarity matrix shape {S.shape} does not match {n} ids")
    labels = _kernels.qt_labels(S, params.admission, GROWTH[params.growth])

    floor = params.min_cluster_size(n)
    clusters, outliers = [], []
    for k in range(int(labels.max()) + 1):
        members = sorted(matrix.ids[i] for i in np.flatnonzero(labels == k))
        if len(members) >= floor:
            clusters.append(Cluster(members))
        else:
            outliers.extend(members)
    clusters.sort(key=lambda c: (-len(c), c.members[0]))
    return Clustering(clusters, sorted(outliers), params)


def cluster_group(
    traces: Sequence[DayTrace],
    params: QtParams = QtParams(),
    edge_weight: float = 0.5,
    node_weight: float = 0.5,
) -> tuple[Clustering, SimilarityMatrix]:
    """Cluster one activity-level group: per-day models, similarity matrix,
    QT, then a merged model per cluster discovered over its members."""
    if not traces:
        raise DataError("cannot cluster an empty group")
    by_id = {t.day_id: t for t in traces}
    matrix = similarity_matrix(
        [(day, discover_tpa([t])) for day, t in by_id.items()], edge_weight, node_weight
    )
    result = qt_cluster(matrix, params)
    for c in result.clusters:
        c.tpa = discover_tpa([by_id[d] for d in c.members])
    return result, matrix
