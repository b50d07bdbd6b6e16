"""undirected network representation and edge-list ingestion."""

from __future__ import annotations

import io
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import TextIO

import networkx as nx
import numpy as np
import scipy.sparse as sps
from scipy.sparse import csgraph

from sirx._internal.errors import EdgeListParseError, GraphError
from sirx._internal.logging import get_logger
from sirx._internal.types import Edge, FloatArray, IntArray

logger = get_logger(__name__)

_SEPARATOR = re.compile(r"[,\s]+")
_COMMENT_PREFIXES = ("#", "%")

# shipped edge lists, keyed by dataset name
DATASETS: dict[str, str] = {"karate": "karate.edges"}
# known datasets that are not shipped; loadable via an explicit path
EXTERNAL_DATASETS = ("dolphins", "sociopatterns", "facebook", "email", "digg", "enron", "blogcatalog3")


@dataclass(frozen=True)
class Graph:
    """immutable simple undirected graph on nodes 0..n-1.

    edges are stored once, as (i, j) with i < j, in sorted order. ingestion
    metadata (labels and drop counts) does not take part in equality.
    """

    node_count: int
    edges: tuple[Edge, ...]
    labels: tuple[str, ...] | None = field(default=None, compare=False, repr=False)
    dropped_duplicates: int = field(default=0, compare=False, repr=False)
    dropped_self_loops: int = field(default=0, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise GraphError(f"node_count must be positive, got {self.node_count}")
        seen: set[Edge] = set()
        for i, j in self.edges:
            if i == j:
                raise GraphError(f"self-loop on node {i}")
            if not (0 <= i < j < self.node_count):
                raise GraphError(f"edge ({i}, {j}) is not normalized or out of range")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        if self.labels is not None and len(self.labels) != self.node_count:
            raise GraphError("labels must have one entry per node")

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[tuple[int, int]],
        *,
        labels: Sequence[str] | None = None,
        drop_invalid: bool = False,
    ) -> Graph:
        """build a graph from unordered pairs.

        Args:
            node_count: number of nodes
            edges: pairs in any orientation
            labels: optional original label per node id
            drop_invalid: drop self-loops and duplicates instead of raising

        Returns:
            normalized graph
        """
        normalized: set[Edge] = set()
        duplicates = 0
        self_loops = 0
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                if not drop_invalid:
                    raise GraphError(f"self-loop on node {a}")
                self_loops += 1
                continue
            pair = (a, b) if a < b else (b, a)
            if pair in normalized:
                if not drop_invalid:
                    raise GraphError(f"duplicate edge {pair}")
                duplicates += 1
                continue
            normalized.add(pair)
        return cls(
            node_count=node_count,
            edges=tuple(sorted(normalized)),
            labels=tuple(labels) if labels is not None else None,
            dropped_duplicates=duplicates,
            dropped_self_loops=self_loops,
        )

    @property
    def edge_count(self) -> int:
        """number of undirected edges M."""
        return len(self.edges)

    @cached_property
    def edge_array(self) -> IntArray:
        """edges as an (M, 2) integer array."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def degree(self) -> IntArray:
        """per-node degree k_i."""
        degree = np.zeros(self.node_count, dtype=np.int64)
        if self.edges:
            np.add.at(degree, self.edge_array.ravel(), 1)
        return degree

    @cached_property
    def adjacency(self) -> sps.csr_matrix:
        """symmetric sparse adjacency matrix A."""
        e = self.edge_array
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(rows.size, dtype=np.float64)
        return sps.csr_matrix(
            (data, (rows, cols)), shape=(self.node_count, self.node_count)
        )

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """sorted neighbor ids per node."""
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(n)) for n in adj)

    def neighbor_sum(self, x: FloatArray) -> FloatArray:
        """return A·x along the node axis (last axis) of `x`."""
        if x.ndim == 1:
            return np.asarray(self.adjacency @ x)
        return np.asarray(self.adjacency @ x.T).T

    def relabel(self, permutation: Sequence[int]) -> Graph:
        """return a copy where old node v becomes permutation[v]."""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.node_count)):
            raise GraphError("relabel requires a permutation of 0..n-1")
        labels = None
        if self.labels is not None:
            new_labels = [""] * self.node_count
            for old, new in enumerate(perm.tolist()):
                new_labels[new] = self.labels[old]
            labels = new_labels
        return Graph.from_edges(
            self.node_count,
            ((int(perm[i]), int(perm[j])) for i, j in self.edges),
            labels=labels,
        )

    def label_of(self, node: int) -> str:
        """original label of a node id (the id itself when unlabeled)."""
        return self.labels[node] if self.labels is not None else str(node)

    def component_labels(self) -> tuple[int, IntArray]:
        """number of connected components and per-node component id."""
        count, labels = csgraph.connected_components(self.adjacency, directed=False)
        return int(count), labels.astype(np.int64)

    def is_connected(self) -> bool:
        """whether the graph has a single connected component."""
        return self.component_labels()[0] == 1

    def to_networkx(self) -> nx.Graph:
        """copy as a networkx graph on nodes 0..n-1 (isolated nodes included)."""
        out = nx.Graph()
        out.add_nodes_from(range(self.node_count))
        out.add_edges_from(self.edges)
        return out

    @classmethod
    def from_networkx(cls, source: nx.Graph) -> Graph:
        """build a graph from a networkx graph whose nodes are 0..n-1."""
        n = source.number_of_nodes()
        if set(source.nodes) != set(range(n)):
            raise GraphError("networkx graph nodes must be the integers 0..n-1")
        return cls.from_edges(n, source.edges())


def load_edge_list(source: TextIO | str | Path) -> Graph:
    """parse a pair-per-line edge list into a graph.

    labels are mapped to contiguous ids in first-appearance order. lines
    starting with '#' or '%' and blank lines are skipped; columns after
    the first two (weights, timestamps) are ignored.

    Args:
        source: open text stream or path to an edge-list file

    Returns:
        graph with `labels` holding the original label of each id

    Raises:
        EdgeListParseError: if a line holds fewer than two labels or no edge is found
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"edge list not found: {path}")
        with path.open(encoding="utf-8-sig") as handle:
            return load_edge_list(handle)

    ids: dict[str, int] = {}
    pairs: list[Edge] = []
    for line_number, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith(_COMMENT_PREFIXES):
            continue
        tokens = [t for t in _SEPARATOR.split(line) if t]
        if len(tokens) < 2:
            raise EdgeListParseError(
                f"expected two node labels, got {line!r}", line_number
            )
        a, b = tokens[0], tokens[1]
        for label in (a, b):
            if label not in ids:
                ids[label] = len(ids)
        pairs.append((ids[a], ids[b]))

    if not pairs:
        raise EdgeListParseError("empty edge list")

    graph = Graph.from_edges(len(ids), pairs, labels=list(ids), drop_invalid=True)
    if graph.dropped_duplicates or graph.dropped_self_loops:
        logger.warning(
            "dropped %d duplicate edge(s) and %d self-loop(s)",
            graph.dropped_duplicates,
            graph.dropped_self_loops,
        )
    logger.info("loaded graph with N=%d, M=%d", graph.node_count, graph.edge_count)
    return graph


def parse_edge_list(text: str) -> Graph:
    """parse an edge list held in a string."""
    return load_edge_list(io.StringIO(text))


def load_dataset(name: str, data_dir: Path | None = None) -> Graph:
    """load a dataset by name (e.g. 'karate').

    shipped datasets come from the package. a known dataset that is not shipped
    is read from `<data_dir>/<name>.edges` when that file exists.

    Raises:
        GraphError: if the dataset is unknown, or not shipped and missing from data_dir
    """
    key = name.lower()
    if key in DATASETS:
        resource = resources.files("sirx.data").joinpath(DATASETS[key])
        with resource.open("r", encoding="utf-8") as handle:
            return load_edge_list(handle)
    if key in EXTERNAL_DATASETS:
        if data_dir is not None and (data_dir / f"{key}.edges").is_file():
            return load_edge_list(data_dir / f"{key}.edges")
        raise GraphError(
            f"dataset '{name}' is not shipped; download its edge list and "
            f"pass it with `path:`, as a file argument, or as SIRX_DATA_DIR/{key}.edges"
        )
    known = ", ".join(sorted(DATASETS))
    raise GraphError(f"unknown dataset '{name}' (shipped: {known})")
