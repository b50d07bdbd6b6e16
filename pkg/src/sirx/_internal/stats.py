"""topology statistics (mean degree, clustering, path length, assortativity, heterogeneity)."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csgraph

from sirx._internal.errors import GraphError
from sirx._internal.graph import Graph
from sirx._internal.types import FloatArray

# rows of the distance matrix computed per shortest-path call
_CHUNK = 256
# edge-end degree variance below which assortativity is undefined
_VARIANCE_FLOOR = 1e-24


@dataclass(frozen=True)
class NetworkStats:
    """basic statistics of a network.

    `assortativity` is None when the degree sequence has zero variance over
    edge ends, which is distinct from an assortativity of 0.
    """

    n: int
    m: int
    mean_degree: float
    clustering: float
    mean_path_length: float
    assortativity: float | None
    heterogeneity: float

    def as_dict(self) -> dict[str, float | int | None]:
        """statistics keyed by field name."""
        return asdict(self)


def local_clustering(g: Graph) -> FloatArray:
    """per-node clustering coefficient; nodes of degree < 2 get 0."""
    scores = nx.clustering(g.to_networkx())
    return np.array([scores[v] for v in range(g.node_count)], dtype=np.float64)


def mean_shortest_path_length(g: Graph) -> float:
    """mean hop distance over all ordered pairs of distinct connected nodes."""
    total = 0.0
    count = 0
    for start in range(0, g.node_count, _CHUNK):
        rows = np.arange(start, min(start + _CHUNK, g.node_count))
        dist = csgraph.shortest_path(
            g.adjacency, method="D", directed=False, unweighted=True, indices=rows
        )
        finite = np.isfinite(dist) & (dist > 0)
        total += float(dist[finite].sum())
        count += int(finite.sum())
    if count == 0:
        raise GraphError("no connected node pairs")
    return total / count


def degree_assortativity(g: Graph) -> float | None:
    """pearson correlation of degrees at the two ends of every edge.

    None when every edge end carries the same degree (regular graphs), where
    the coefficient is 0/0.
    """
    if g.edge_count == 0:
        return None
    ends = g.degree[g.edge_array].astype(np.float64).ravel()
    if float(np.var(ends)) < _VARIANCE_FLOOR:
        return None
    return float(nx.degree_assortativity_coefficient(g.to_networkx()))


def network_stats(g: Graph) -> NetworkStats:
    """compute all seven topology statistics.

    Raises:
        GraphError: if N < 2 or the graph has no edges
    """
    if g.node_count < 2:
        raise GraphError("network statistics need at least two nodes")
    if g.edge_count < 1:
        raise GraphError("network statistics need at least one edge (heterogeneity undefined)")

    k = g.degree.astype(np.float64)
    mean_k = float(k.mean())
    return NetworkStats(
        n=g.node_count,
        m=g.edge_count,
        mean_degree=2.0 * g.edge_count / g.node_count,
        clustering=float(nx.average_clustering(g.to_networkx())),
        mean_path_length=mean_shortest_path_length(g),
        assortativity=degree_assortativity(g),
        heterogeneity=float(k.std() / mean_k),
    )
