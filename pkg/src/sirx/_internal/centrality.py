"""node centrality measures: degree, betweenness, closeness, cycle number, cycle ratio."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

import networkx as nx
import numpy as np

from sirx._internal.errors import GraphError
from sirx._internal.graph import Graph
from sirx._internal.types import FloatArray

DEFAULT_MAX_LEN = 6

Cycle = tuple[int, ...]


class CentralityMetric(str, Enum):
    """supported centrality measures."""

    DC = "dc"
    BC = "bc"
    CC = "cc"
    CN = "cn"
    CR = "cr"

    @classmethod
    def _missing_(cls, value: object) -> CentralityMetric | None:
        if isinstance(value, str):
            lowered = value.lower()
            for member in cls:
                if member.value == lowered:
                    return member
        return None


@dataclass(frozen=True)
class CentralityVector:
    """one centrality value per node."""

    metric: CentralityMetric
    values: FloatArray

    def __post_init__(self) -> None:
        if self.values.ndim != 1:
            raise GraphError("centrality values must be one-dimensional")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise GraphError(f"{self.metric.value} values must be finite and nonnegative")

    def __len__(self) -> int:
        return int(self.values.size)


def degree_centrality(g: Graph) -> CentralityVector:
    """k_i / (N − 1)."""
    if g.node_count < 2:
        raise GraphError("degree centrality needs N >= 2")
    values = g.degree.astype(np.float64) / (g.node_count - 1)
    return CentralityVector(CentralityMetric.DC, values)


def betweenness_centrality(g: Graph) -> CentralityVector:
    """shortest-path betweenness, normalized by (N−1)(N−2)/2 with endpoints excluded."""
    n = g.node_count
    if n < 3:
        raise GraphError("betweenness centrality needs N >= 3")
    scores = nx.betweenness_centrality(g.to_networkx(), normalized=True)
    values = np.array([scores[v] for v in range(n)])
    return CentralityVector(CentralityMetric.BC, values)


def closeness_centrality(g: Graph) -> CentralityVector:
    """component-corrected closeness: (r/Σd)·(r/(N−1)) over the r reachable nodes."""
    n = g.node_count
    if n < 2:
        raise GraphError("closeness centrality needs N >= 2")
    scores = nx.closeness_centrality(g.to_networkx(), wf_improved=True)
    values = np.array([scores[v] for v in range(n)])
    return CentralityVector(CentralityMetric.CC, values)


def canonical_cycle(nodes: tuple[int, ...] | list[int]) -> Cycle:
    """rotate a cycle to start at its smallest node, oriented so the second node < the last."""
    seq = list(nodes)
    pivot = seq.index(min(seq))
    seq = seq[pivot:] + seq[:pivot]
    if len(seq) > 2 and seq[1] > seq[-1]:
        seq = [seq[0], *reversed(seq[1:])]
    return tuple(seq)


def _cycles_of_length(
    neighbors: tuple[tuple[int, ...], ...],
    dist: dict[int, int],
    source: int,
    length: int,
) -> set[Cycle]:
    """simple cycles of exactly `length` edges through `source`."""
    found: set[Cycle] = set()
    path = [source]
    on_path = {source}

    def extend(v: int, depth: int) -> None:
        for w in neighbors[v]:
            if w == source:
                if depth == length - 1 and path[1] < path[-1]:
                    found.add(canonical_cycle(path))
                continue
            # w must still be able to close the cycle within `length` edges
            if w in on_path or depth + 1 + dist[w] > length:
                continue
            path.append(w)
            on_path.add(w)
            extend(w, depth + 1)
            path.pop()
            on_path.discard(w)

    extend(source, 0)
    return found


def _node_shortest_cycles(g: Graph, view: nx.Graph, source: int, max_len: int) -> set[Cycle]:
    """all simple cycles of minimal length (≤ max_len) through `source`."""
    if len(g.neighbors[source]) < 2:
        return set()
    dist = nx.single_source_shortest_path_length(view, source)
    for length in range(3, max_len + 1):
        found = _cycles_of_length(g.neighbors, dist, source, length)
        if found:
            return found
    return set()


def shortest_cycles(g: Graph, max_len: int = DEFAULT_MAX_LEN) -> tuple[list[set[Cycle]], set[Cycle]]:
    """per-node shortest cycles and their union.

    Returns:
        (cycles through each node at that node's minimal cycle length,
         union of those sets as canonical node tuples)
    """
    if max_len < 3:
        raise GraphError(f"max_len must be >= 3, got {max_len}")
    if g.node_count < 3:
        raise GraphError("cycle measures need N >= 3")
    view = g.to_networkx()
    per_node = [_node_shortest_cycles(g, view, v, max_len) for v in range(g.node_count)]
    union: set[Cycle] = set()
    for cycles in per_node:
        union |= cycles
    return per_node, union


def cycle_number(g: Graph, max_len: int = DEFAULT_MAX_LEN) -> CentralityVector:
    """number of distinct shortest cycles through each node."""
    per_node, _ = shortest_cycles(g, max_len)
    values = np.array([float(len(c)) for c in per_node])
    return CentralityVector(CentralityMetric.CN, values)


def cycle_ratio(g: Graph, max_len: int = DEFAULT_MAX_LEN) -> CentralityVector:
    """Σ_j c_ij / c_jj over the union of shortest cycles.

    c_ij counts cycles of the union through both i and j, c_jj those through j.
    """
    _, union = shortest_cycles(g, max_len)
    through: Counter[int] = Counter()
    shared: dict[int, Counter[int]] = {}
    for cycle in sorted(union):
        members = set(cycle)
        for i in members:
            through[i] += 1
            row = shared.setdefault(i, Counter())
            for j in members:
                row[j] += 1

    values = np.zeros(g.node_count)
    for i, row in shared.items():
        values[i] = sum(count / through[j] for j, count in sorted(row.items()))
    return CentralityVector(CentralityMetric.CR, values)


def compute_centrality(
    g: Graph, metric: CentralityMetric | str, *, max_len: int = DEFAULT_MAX_LEN
) -> CentralityVector:
    """dispatch to the requested centrality measure."""
    metric = CentralityMetric(metric)
    if metric is CentralityMetric.DC:
        return degree_centrality(g)
    if metric is CentralityMetric.BC:
        return betweenness_centrality(g)
    if metric is CentralityMetric.CC:
        return closeness_centrality(g)
    if metric is CentralityMetric.CN:
        return cycle_number(g, max_len)
    return cycle_ratio(g, max_len)
