"""synthetic network generators (BA, WS, ER) built with networkx.

the same arguments always give the same edge set; the integer seed is handed
to networkx, which owns the random stream.
"""

from __future__ import annotations

import networkx as nx

from sirx._internal.errors import GraphError
from sirx._internal.graph import Graph


def generate_ba(n: int, m_attach: int, seed: int) -> Graph:
    """barabási–albert preferential attachment graph.

    networkx seeds the process with a star on `m_attach + 1` nodes and every
    later node attaches to `m_attach` distinct existing nodes chosen
    proportionally to degree, so M = m_attach·(n − m_attach).

    Args:
        n: number of nodes
        m_attach: edges added per new node
        seed: random seed

    Returns:
        connected BA graph
    """
    if m_attach < 1 or n <= m_attach:
        raise GraphError(f"BA requires n > m_attach >= 1, got n={n}, m_attach={m_attach}")
    return Graph.from_networkx(nx.barabasi_albert_graph(n, m_attach, seed=seed))


def ring_lattice(n: int, k: int) -> Graph:
    """ring where every node links to its k/2 nearest neighbors on each side."""
    if k % 2:
        raise GraphError(f"k must be even, got {k}")
    if not n > k >= 2:
        raise GraphError(f"ring lattice requires n > k >= 2, got n={n}, k={k}")
    return Graph.from_networkx(nx.circulant_graph(n, range(1, k // 2 + 1)))


def generate_ws(n: int, k: int, p: float, seed: int) -> Graph:
    """watts–strogatz small-world graph.

    rewires the far end of each ring-lattice edge with probability p, avoiding
    self-loops and duplicates, so M = n·k/2.
    """
    if k % 2:
        raise GraphError(f"k must be even, got {k}")
    if not n > k >= 2:
        raise GraphError(f"WS requires n > k >= 2, got n={n}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"rewire probability must lie in [0, 1], got {p}")
    return Graph.from_networkx(nx.watts_strogatz_graph(n, k, p, seed=seed))


def generate_er(n: int, m: int, seed: int) -> Graph:
    """erdős–rényi G(n, m): exactly m distinct edges drawn uniformly."""
    if n < 1:
        raise GraphError(f"ER requires n >= 1, got {n}")
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise GraphError(f"ER requires 0 <= m <= {total} for n={n}, got m={m}")
    return Graph.from_networkx(nx.gnm_random_graph(n, m, seed=seed))
