"""comparison allocation strategies: uniform, centrality-driven, DRA, optimal, uncontrolled."""

from __future__ import annotations

from collections.abc import MutableMapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sirx._internal.centrality import CentralityMetric, CentralityVector, compute_centrality
from sirx._internal.control import FbsConfig, FbsSolution, fbs_solve
from sirx._internal.dynamics import (
    ControlTrajectory,
    NodeState,
    RateRule,
    SirParams,
    StateTrajectory,
    integrate,
    simulate_feedback,
)
from sirx._internal.errors import ParameterError
from sirx._internal.graph import Graph
from sirx._internal.logging import get_logger
from sirx._internal.types import FloatArray, IntArray

logger = get_logger(__name__)

Sign = Literal["+", "-"]
CentralityCache = MutableMapping[CentralityMetric, CentralityVector]


class StrategyKind(str, Enum):
    """the fourteen comparison strategies, by CLI name."""

    OPTIMAL = "optimal"
    UN = "un"
    DC_PLUS = "dc+"
    DC_MINUS = "dc-"
    BC_PLUS = "bc+"
    BC_MINUS = "bc-"
    CC_PLUS = "cc+"
    CC_MINUS = "cc-"
    CN_PLUS = "cn+"
    CN_MINUS = "cn-"
    CR_PLUS = "cr+"
    CR_MINUS = "cr-"
    DRA = "dra"
    UNC = "unc"

    @classmethod
    def _missing_(cls, value: object) -> StrategyKind | None:
        if isinstance(value, str):
            lowered = value.strip().lower()
            for member in cls:
                if member.value == lowered:
                    return member
        return None

    @property
    def metric(self) -> CentralityMetric | None:
        """centrality behind a ± strategy, None for the others."""
        if self.value[-1] in "+-":
            return CentralityMetric(self.value[:-1])
        return None

    @property
    def sign(self) -> Sign | None:
        if self.value[-1] == "+":
            return "+"
        if self.value[-1] == "-":
            return "-"
        return None


class BaselineOptions(BaseModel):
    """settings for the centrality and DRA baselines."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cycle_max_len: int = Field(default=6, ge=3, description="longest cycle counted by cn/cr")
    dra_restarts: int = Field(default=16, ge=1, description="greedy maxcut restarts")
    dra_threshold: float = Field(
        default=0.5, ge=0.0, le=1.0, description="I_i at or above which a node counts as infected"
    )
    dra_budget: Literal["unit", "shared"] = Field(
        default="unit", description="'unit' spends min(1, w_total) per time point, 'shared' spends w_total"
    )
    seed: int = 0


@dataclass(frozen=True)
class StrategySpec:
    kind: StrategyKind
    options: BaselineOptions = field(default_factory=BaselineOptions)
    fbs: FbsConfig = field(default_factory=FbsConfig)

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class StrategyRun:
    """the control a strategy emitted and the states it produced."""

    name: str
    control: ControlTrajectory
    states: StateTrajectory
    solution: FbsSolution | None = None


def uniform_allocation(g: Graph, w_total: float) -> FloatArray:
    """w_i = min(1, w_total / N)."""
    if w_total < 0:
        raise ParameterError(f"w_total must be nonnegative, got {w_total}")
    return np.full(g.node_count, min(1.0, w_total / g.node_count))


def water_fill(scores: FloatArray, budget: float) -> FloatArray:
    """weights ∝ scores summing to `budget`, each capped at 1.

    capped nodes are frozen and the excess is redistributed over the rest in
    proportion to their scores; once the remaining scores are all zero the
    leftover is spread evenly over those nodes.
    """
    n = scores.size
    if not 0.0 <= budget <= n:
        raise ParameterError(f"budget must lie in [0, {n}], got {budget}")
    weights = np.zeros(n)
    capped = np.zeros(n, dtype=bool)
    while True:
        free = ~capped
        if not np.any(free):
            break
        remaining = budget - float(capped.sum())
        total = float(scores[free].sum())
        if total <= 0.0:
            weights[free] = remaining / int(free.sum())
            break
        weights[free] = remaining * scores[free] / total
        over = free & (weights > 1.0)
        if not np.any(over):
            break
        capped |= over
        weights[capped] = 1.0
    return weights


def centrality_allocation(
    g: Graph, metric: CentralityVector, sign: Sign, w_total: float
) -> FloatArray:
    """static weights positively ('+') or negatively ('-') aligned with a centrality.

    '-' scores by the reflection max + min − c_i. the full budget
    min(w_total, N) is spent; an all-zero score vector falls back to uniform.
    """
    if len(metric) != g.node_count:
        raise ParameterError(f"metric has {len(metric)} entries for {g.node_count} nodes")
    if w_total < 0:
        raise ParameterError(f"w_total must be nonnegative, got {w_total}")
    values = metric.values
    if sign == "+":
        scores = values.copy()
    elif sign == "-":
        scores = values.max() + values.min() - values
    else:
        raise ParameterError(f"sign must be '+' or '-', got {sign!r}")
    if float(scores.sum()) <= 0.0:
        return uniform_allocation(g, w_total)
    return water_fill(scores, min(w_total, float(g.node_count)))


def maxcut(order: IntArray | list[int], g: Graph) -> int:
    """largest number of edges crossing any prefix/suffix split of `order`."""
    sequence = [int(v) for v in order]
    if sorted(sequence) != list(range(g.node_count)):
        raise ParameterError("order must be a permutation of the node ids")
    placed = np.zeros(g.node_count, dtype=bool)
    cut = 0
    worst = 0
    for v in sequence:
        inside = sum(1 for w in g.neighbors[v] if placed[w])
        cut += len(g.neighbors[v]) - 2 * inside
        placed[v] = True
        worst = max(worst, cut)
    return worst


def _greedy_order(g: Graph, start: int) -> IntArray:
    n = g.node_count
    degree = g.degree
    ids = np.arange(n)
    links = np.zeros(n, dtype=np.int64)
    placed = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)

    v = start
    for position in range(n):
        order[position] = v
        placed[v] = True
        for w in g.neighbors[v]:
            links[w] += 1
        if position == n - 1:
            break
        candidates = ids[~placed]
        # new cut edges, then higher degree, then lower id
        delta = degree[candidates] - 2 * links[candidates]
        pick = np.lexsort((candidates, -degree[candidates], delta))[0]
        v = int(candidates[pick])
    return order


def dra_priority(g: Graph, restarts: int = 16, seed: int = 0) -> IntArray:
    """node order approximately minimizing its maxcut.

    greedy prefix growth, restarted from the minimum-degree node and then
    from random nodes; the first order with the smallest maxcut wins.
    """
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    rng = np.random.default_rng(seed)
    best: IntArray | None = None
    best_cut = -1
    for attempt in range(restarts):
        start = int(np.argmin(g.degree)) if attempt == 0 else int(rng.integers(g.node_count))
        order = _greedy_order(g, start)
        cut = maxcut(order, g)
        if best is None or cut < best_cut:
            best, best_cut = order, cut
    assert best is not None
    logger.debug("dra priority maxcut=%d over %d restarts", best_cut, restarts)
    return best


def dra_allocate(
    priority: IntArray, state: NodeState, w_total: float, infected_threshold: float
) -> FloatArray:
    """full weight to infected nodes in priority order until the budget runs out."""
    if not 0.0 <= infected_threshold <= 1.0:
        raise ParameterError(f"infected_threshold must lie in [0, 1], got {infected_threshold}")
    weights = np.zeros(state.node_count)
    remaining = float(w_total)
    for v in priority:
        if remaining <= 0.0:
            break
        if state.i[v] >= infected_threshold:
            weights[v] = min(1.0, remaining)
            remaining -= weights[v]
    return weights


def _centrality(
    g: Graph, metric: CentralityMetric, options: BaselineOptions, cache: CentralityCache | None
) -> CentralityVector:
    if cache is not None and metric in cache:
        return cache[metric]
    vector = compute_centrality(g, metric, max_len=options.cycle_max_len)
    if cache is not None:
        cache[metric] = vector
    return vector


def run_strategy(
    spec: StrategySpec,
    g: Graph,
    params: SirParams,
    initial: NodeState,
    *,
    cache: CentralityCache | None = None,
) -> StrategyRun:
    """produce the control and state trajectory of one strategy.

    static strategies hold their weights over the whole grid, DRA re-allocates
    from the state at every grid point under the additive-recovery rule, and
    optimal delegates to the forward-backward sweep.
    """
    kind = spec.kind
    logger.info("running strategy %s", kind.value)

    if kind is StrategyKind.OPTIMAL:
        solution = fbs_solve(g, params, initial, spec.fbs)
        return StrategyRun(kind.value, solution.control, solution.states, solution)

    if kind is StrategyKind.DRA:
        options = spec.options
        priority = dra_priority(g, options.dra_restarts, options.seed)
        budget = min(1.0, params.w_total) if options.dra_budget == "unit" else params.w_total
        control, states = simulate_feedback(
            initial,
            lambda state: dra_allocate(priority, state, budget, options.dra_threshold),
            params,
            g,
            RateRule.ADDITIVE_RECOVERY,
        )
        return StrategyRun(kind.value, control, states)

    if kind is StrategyKind.UNC:
        control = ControlTrajectory.zeros(params, g.node_count)
    elif kind is StrategyKind.UN:
        control = ControlTrajectory.constant(params, uniform_allocation(g, params.w_total))
    else:
        metric = kind.metric
        sign = kind.sign
        assert metric is not None and sign is not None
        vector = _centrality(g, metric, spec.options, cache)
        control = ControlTrajectory.constant(
            params, centrality_allocation(g, vector, sign, params.w_total)
        )
    return StrategyRun(kind.value, control, integrate(initial, control, params, g))
