"""shared fixtures: small graphs with known answers and default parameters."""

from __future__ import annotations

import pytest

from sirx._internal.dynamics import SirParams
from sirx._internal.generators import ring_lattice
from sirx._internal.graph import Graph, load_dataset


@pytest.fixture
def path3() -> Graph:
    """0 - 1 - 2"""
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def path4() -> Graph:
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def star5() -> Graph:
    """hub 0 with leaves 1..4."""
    return Graph.from_edges(5, [(0, j) for j in range(1, 5)])


@pytest.fixture
def k4() -> Graph:
    return Graph.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])


@pytest.fixture
def ring8() -> Graph:
    """8-node ring lattice with 4 neighbors per node."""
    return ring_lattice(8, 4)


@pytest.fixture(scope="session")
def karate() -> Graph:
    return load_dataset("karate")


@pytest.fixture
def params() -> SirParams:
    return SirParams(beta0=0.5, gamma0=0.2, u=0.5, c=1.0, w_total=1.0, horizon=5.0, steps=100)
