"""tests for topology statistics."""

from __future__ import annotations

import numpy as np
import pytest

from sirx._internal.errors import GraphError
from sirx._internal.generators import generate_ba
from sirx._internal.graph import Graph
from sirx._internal.stats import (
    degree_assortativity,
    local_clustering,
    mean_shortest_path_length,
    network_stats,
)


class TestKarate:
    """karate club statistics against known values and direct formulas."""

    def test_known_values(self, karate: Graph) -> None:
        """test the seven statistics of the karate club."""
        stats = network_stats(karate)
        assert stats.n == 34
        assert stats.m == 78
        assert stats.mean_degree == pytest.approx(4.5882, abs=1e-3)
        assert stats.clustering == pytest.approx(0.5706, abs=1e-3)
        assert stats.mean_path_length == pytest.approx(2.4082, abs=1e-3)
        assert stats.assortativity == pytest.approx(-0.4756, abs=1e-2)
        assert stats.heterogeneity == pytest.approx(0.8326, abs=1e-2)

    def test_against_direct_formulas(self, karate: Graph) -> None:
        """test clustering and assortativity against triangle counts and edge-end correlation."""
        a = karate.adjacency.toarray()
        k = a.sum(axis=1)
        triangles = np.diag(a @ a @ a) / 2.0
        expected_c = np.where(k > 1, triangles / np.maximum(k * (k - 1) / 2.0, 1.0), 0.0).mean()
        e = karate.edge_array
        x = np.concatenate([k[e[:, 0]], k[e[:, 1]]])
        y = np.concatenate([k[e[:, 1]], k[e[:, 0]]])
        stats = network_stats(karate)
        assert stats.clustering == pytest.approx(expected_c, abs=1e-12)
        assert stats.assortativity == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-9)

    def test_assortativity_differs_from_published_table(self, karate: Graph) -> None:
        """test the computed karate assortativity is the standard −0.4756, not −0.0456."""
        stats = network_stats(karate)
        assert stats.assortativity == pytest.approx(-0.47561, abs=1e-4)
        assert abs(stats.assortativity - (-0.0456)) > 0.4


class TestInvariance:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_relabeling_keeps_statistics(self, seed: int) -> None:
        """test every statistic is unchanged under a node permutation."""
        g = generate_ba(60, 2, seed=seed)
        perm = np.random.default_rng(seed).permutation(g.node_count)
        before = network_stats(g).as_dict()
        after = network_stats(g.relabel(perm.tolist())).as_dict()
        assert after.keys() == before.keys()
        for key, value in before.items():
            assert after[key] == pytest.approx(value, abs=1e-12), key


class TestSmallGraphs:
    def test_complete_graph(self, k4: Graph) -> None:
        """test K4 has clustering 1 and unit distances."""
        stats = network_stats(k4)
        assert stats.mean_degree == 3.0
        assert stats.clustering == 1.0
        assert stats.mean_path_length == 1.0
        assert stats.heterogeneity == 0.0

    def test_star(self, star5: Graph) -> None:
        """test the star is perfectly disassortative with H = 0.75."""
        stats = network_stats(star5)
        assert stats.clustering == 0.0
        assert stats.assortativity == pytest.approx(-1.0)
        assert stats.heterogeneity == pytest.approx(0.75)

    def test_regular_graph_assortativity_undefined(self, ring8: Graph) -> None:
        """test zero degree variance gives None, not 0."""
        assert degree_assortativity(ring8) is None
        assert network_stats(ring8).assortativity is None

    def test_path_length(self, path3: Graph) -> None:
        """test mean distance on a 3-node path is 4/3."""
        assert mean_shortest_path_length(path3) == pytest.approx(4.0 / 3.0)

    def test_path_length_ignores_disconnected_pairs(self) -> None:
        """test only connected pairs are averaged."""
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        assert mean_shortest_path_length(g) == 1.0

    def test_local_clustering_low_degree_is_zero(self) -> None:
        """test nodes of degree below 2 get clustering 0."""
        g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
        assert np.allclose(local_clustering(g), [1.0, 1.0, 1.0 / 3.0, 0.0])

    def test_single_node(self) -> None:
        """test statistics need at least two nodes."""
        with pytest.raises(GraphError):
            network_stats(Graph(1, ()))

    def test_edgeless(self) -> None:
        """test heterogeneity is undefined without edges."""
        with pytest.raises(GraphError):
            network_stats(Graph(3, ()))

    def test_as_dict_order(self, k4: Graph) -> None:
        """test the dict keeps field order for table output."""
        assert list(network_stats(k4).as_dict()) == [
            "n",
            "m",
            "mean_degree",
            "clustering",
            "mean_path_length",
            "assortativity",
            "heterogeneity",
        ]
