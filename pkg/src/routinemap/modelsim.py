"""Similarity between process models.

The score mixes two terms, both in [0, 1]:

* edge term: Bray-Curtis similarity of the per-model transition shares,
  taken over the union of transitions (sentinel edges included);
* node term: one minus half the L1 distance between duration profiles.

``tpa_similarity`` evaluates one pair straight from the dictionaries;
``similarity_matrix`` vectorises all pairs through the L1 kernel.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError
from .tpa import Tpa, duration_profile, edge_shares


def check_weights(edge_weight: float, node_weight: float) -> None:
    if edge_weight < 0 or node_weight < 0:
        raise ConfigError("similarity weights must be non-negative")
    if edge_weight == 0 and node_weight == 0:
        raise ConfigError("similarity weights cannot both be zero")
    if abs(edge_weight + node_weight - 1.0) > 1e-9:
        raise ConfigError(f"similarity weights must sum to 1, got {edge_weight} + {node_weight}")


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


def edge_similarity(a: Tpa, b: Tpa) -> float:
    pa, pb = edge_shares(a), edge_shares(b)
    keys = sorted(set(pa) | set(pb))
    num = sum(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in keys)
    den = sum(pa.get(k, 0.0) + pb.get(k, 0.0) for k in keys)
    if den == 0:
        return 1.0
    return _clip01(1.0 - num / den)


def node_similarity(a: Tpa, b: Tpa) -> float:
    da, db = duration_profile(a), duration_profile(b)
    keys = sorted(set(da) | set(db))
    return _clip01(1.0 - 0.5 * sum(abs(da.get(k, 0.0) - db.get(k, 0.0)) for k in keys))


def tpa_similarity(a: Tpa, b: Tpa, edge_weight: float = 0.5, node_weight: float = 0.5) -> float:
    check_weights(edge_weight, node_weight)
    return _clip01(edge_weight * edge_similarity(a, b) + node_weight * node_similarity(a, b))


@dataclass(frozen=True)
class SimilarityMatrix:
    ids: tuple[str, ...]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["day", *self.ids])
        for day, row in zip(self.ids, self.values):
            w.writerow([day, *(repr(float(x)) for x in row)])
        return buf.getvalue()


def share_vectors(models: Sequence[Tpa]) -> tuple[np.ndarray, np.ndarray]:
    """Dense edge-share and duration-fraction matrices, one row per model,
    columns over the sorted union of edges / locations."""
    shares = [edge_shares(m) for m in models]
    profiles = [duration_profile(m) for m in models]
    edges = sorted(set().union(*shares)) if shares else []
    locs = sorted(set().union(*profiles)) if profiles else []
    e_idx = {e: i for i, e in enumerate(edges)}
    l_idx = {l: i for i, l in enumerate(locs)}
    E = np.zeros((len(models), len(edges)))
    D = np.zeros((len(models), len(locs)))
    for r, (sh, pr) in enumerate(zip(shares, profiles)):
        for e, v in sh.items():
            E[r, e_idx[e]] = v
        for l, v in pr.items():
            D[r, l_idx[l]] = v
    return E, D


def similarity_matrix(
    models: Sequence[tuple[str, Tpa]], edge_weight: float = 0.5, node_weight: float = 0.5
) -> SimilarityMatrix:
    check_weights(edge_weight, node_weight)
    ordered = sorted(models, key=lambda pair: pair[0])
    ids = tuple(day for day, _ in ordered)
    E, D = share_vectors([m for _, m in ordered])
    # shares sum to one per row, so the Bray-Curtis denominator is 2
    s_edge = 1.0 - 0.5 * _kernels.pairwise_l1(E)
    s_node = 1.0 - 0.5 * _kernels.pairwise_l1(D)
    S = np.clip(edge_weight * s_edge + node_weight * s_node, 0.0, 1.0)
    np.fill_diagonal(S, 1.0)
    return SimilarityMatrix(ids, S)
