"""network SIR dynamics: right-hand sides, RK4 integration, reproduction numbers."""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
import scipy.sparse as sps
from pydantic import BaseModel, ConfigDict, Field

from sirx._internal.errors import GraphError, InvariantError, ParameterError
from sirx._internal.graph import Graph
from sirx._internal.logging import get_logger
from sirx._internal.spectral import DEFAULT_TOL, scaled_spectral_radius, spectral_radius
from sirx._internal.types import FloatArray

logger = get_logger(__name__)

CONSERVATION_TOL = 1e-9
POSITIVITY_TOL = 1e-6
# slack on [0, 1] weight bounds for values produced by floating-point mixing
_WEIGHT_SLACK = 1e-12


class SirParams(BaseModel):
    """model parameters shared by every strategy in a run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    beta0: float = Field(ge=0.0, description="baseline propagation rate")
    gamma0: float = Field(gt=0.0, description="baseline recovery rate")
    u: float = Field(default=0.5, ge=0.0, le=1.0, description="global control intensity")
    c: float = Field(default=1.0, gt=0.0, description="cost coefficient")
    w_total: float = Field(default=1.0, ge=0.0, description="resource budget per time point")
    horizon: float = Field(default=10.0, gt=0.0, description="time horizon T")
    steps: int = Field(default=200, ge=2, description="grid intervals K")

    @property
    def dt(self) -> float:
        """grid spacing T/K."""
        return self.horizon / self.steps

    @property
    def grid(self) -> FloatArray:
        """the K+1 grid times t_0..t_K."""
        return np.linspace(0.0, self.horizon, self.steps + 1)


class RateRule(str, Enum):
    """how a control weight modifies the per-node rates."""

    PROPORTIONAL = "proportional"
    ADDITIVE_RECOVERY = "additive_recovery"


@dataclass(frozen=True)
class NodeState:
    """per-node S, I, R probabilities at one time."""

    s: FloatArray
    i: FloatArray
    r: FloatArray

    def __post_init__(self) -> None:
        if not (self.s.ndim == 1 and self.s.shape == self.i.shape == self.r.shape):
            raise ParameterError("s, i, r must be one-dimensional arrays of equal length")
        stacked = np.stack([self.s, self.i, self.r])
        if not np.all(np.isfinite(stacked)):
            raise ParameterError("state contains non-finite values")
        if stacked.min() < -POSITIVITY_TOL or stacked.max() > 1.0 + POSITIVITY_TOL:
            raise ParameterError("state components must lie in [0, 1]")
        deviation = float(np.abs(stacked.sum(axis=0) - 1.0).max())
        if deviation > CONSERVATION_TOL:
            raise ParameterError(f"s + i + r must equal 1 per node (off by {deviation:.3e})")

    @property
    def node_count(self) -> int:
        return int(self.s.size)


class StateDerivative(NamedTuple):
    ds: FloatArray
    di: FloatArray
    dr: FloatArray


@dataclass(frozen=True)
class StateTrajectory:
    """states on the uniform grid; s, i, r have shape (K+1, N)."""

    grid: FloatArray
    s: FloatArray
    i: FloatArray
    r: FloatArray

    def __post_init__(self) -> None:
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise ParameterError("grid must hold at least two time points")
        if np.any(np.diff(self.grid) <= 0):
            raise ParameterError("grid must be strictly increasing")
        expected = (self.grid.size, self.s.shape[1] if self.s.ndim == 2 else -1)
        for name, arr in (("s", self.s), ("i", self.i), ("r", self.r)):
            if arr.shape != expected:
                raise ParameterError(f"{name} must have shape {expected}, got {arr.shape}")

    @property
    def node_count(self) -> int:
        return int(self.s.shape[1])

    @property
    def steps(self) -> int:
        return int(self.grid.size - 1)

    def __len__(self) -> int:
        return int(self.grid.size)

    def state_at(self, k: int) -> NodeState:
        """the NodeState at grid index k."""
        return NodeState(self.s[k].copy(), self.i[k].copy(), self.r[k].copy())

    def mean_infected(self) -> FloatArray:
        """infection density (1/N)·Σ_i I_i(t_k)."""
        return self.i.mean(axis=1)

    def mean_susceptible(self) -> FloatArray:
        return self.s.mean(axis=1)

    def mean_recovered(self) -> FloatArray:
        return self.r.mean(axis=1)


@dataclass(frozen=True)
class ControlTrajectory:
    """per-node weights w_i(t_k) with shape (K+1, N).

    the weight at t_k is held on [t_k, t_{k+1}); the last row only enters
    the running cost.
    """

    grid: FloatArray
    weights: FloatArray

    def __post_init__(self) -> None:
        if self.weights.ndim != 2 or self.weights.shape[0] != self.grid.size:
            raise ParameterError(
                f"weights must have shape ({self.grid.size}, N), got {self.weights.shape}"
            )

    @classmethod
    def zeros(cls, params: SirParams, node_count: int) -> ControlTrajectory:
        return cls(params.grid, np.zeros((params.steps + 1, node_count)))

    @classmethod
    def constant(cls, params: SirParams, weights: FloatArray) -> ControlTrajectory:
        """hold one static weight vector over the whole grid."""
        w = np.asarray(weights, dtype=np.float64)
        return cls(params.grid, np.tile(w, (params.steps + 1, 1)))

    @property
    def node_count(self) -> int:
        return int(self.weights.shape[1])

    def at(self, k: int) -> FloatArray:
        return self.weights[k]

    def validate(self, w_total: float, tol: float = CONSERVATION_TOL) -> None:
        """check bounds and the budget at every grid point.

        Raises:
            ParameterError: naming the first offending grid index
        """
        w = self.weights
        if np.any(w < -_WEIGHT_SLACK) or np.any(w > 1.0 + _WEIGHT_SLACK):
            k = int(np.argmax(np.any((w < -_WEIGHT_SLACK) | (w > 1.0 + _WEIGHT_SLACK), axis=1)))
            raise ParameterError(f"weights leave [0, 1] at grid index {k}")
        totals = w.sum(axis=1)
        over = totals > w_total + tol
        if np.any(over):
            k = int(np.argmax(over))
            raise ParameterError(
                f"budget exceeded at grid index {k}: {totals[k]:.6g} > {w_total:.6g}"
            )


def _check_weights(w: FloatArray, n: int) -> FloatArray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (n,):
        raise ParameterError(f"weights must have length {n}, got shape {w.shape}")
    if np.any(w < -_WEIGHT_SLACK) or np.any(w > 1.0 + _WEIGHT_SLACK):
        raise ParameterError("weights must lie in [0, 1]")
    return w


def rates(
    w: FloatArray, params: SirParams, rule: RateRule = RateRule.PROPORTIONAL
) -> tuple[FloatArray, FloatArray]:
    """per-node (β_i, γ_i) under weights w."""
    if rule is RateRule.PROPORTIONAL:
        return params.beta0 * (1.0 - params.u * w), params.gamma0 * (1.0 + params.u * w)
    return np.full_like(w, params.beta0), params.gamma0 + params.u * w


def _field(
    y: FloatArray, beta: FloatArray, gamma: FloatArray, adjacency: sps.csr_matrix
) -> FloatArray:
    """derivative of the stacked (3, N) state."""
    s, i = y[0], y[1]
    ds = -beta * s * (adjacency @ i)
    dr = gamma * i
    di = -ds - dr
    return np.stack([ds, di, dr])


def rhs_uncontrolled(state: NodeState, params: SirParams, g: Graph) -> StateDerivative:
    """Ṡ = −β0·S·(A·I), İ = −Ṡ − γ0·I, Ṙ = γ0·I."""
    n = state.node_count
    beta = np.full(n, params.beta0)
    gamma = np.full(n, params.gamma0)
    d = _field(np.stack([state.s, state.i, state.r]), beta, gamma, g.adjacency)
    return StateDerivative(d[0], d[1], d[2])


def rhs_controlled(
    state: NodeState,
    w: FloatArray,
    params: SirParams,
    g: Graph,
    rule: RateRule = RateRule.PROPORTIONAL,
) -> StateDerivative:
    """controlled right-hand side with per-node rates from `rates`.

    Raises:
        ParameterError: if any weight lies outside [0, 1]
    """
    w = _check_weights(w, state.node_count)
    beta, gamma = rates(w, params, rule)
    d = _field(np.stack([state.s, state.i, state.r]), beta, gamma, g.adjacency)
    return StateDerivative(d[0], d[1], d[2])


def rk4_step(
    y: FloatArray,
    beta: FloatArray,
    gamma: FloatArray,
    dt: float,
    adjacency: sps.csr_matrix,
) -> FloatArray:
    """one classical RK4 step of the stacked state with frozen rates."""
    k1 = _field(y, beta, gamma, adjacency)
    k2 = _field(y + 0.5 * dt * k1, beta, gamma, adjacency)
    k3 = _field(y + 0.5 * dt * k2, beta, gamma, adjacency)
    k4 = _field(y + dt * k3, beta, gamma, adjacency)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_invariants(y: FloatArray, reference: FloatArray, step: int) -> None:
    if not np.all(np.isfinite(y)):
        raise InvariantError("non-finite state", step=step, breach=float("inf"))
    drift = float(np.abs(y.sum(axis=0) - reference).max())
    if drift > CONSERVATION_TOL:
        raise InvariantError("conservation violated", step=step, breach=drift)
    low = float(y.min())
    if low < -POSITIVITY_TOL:
        raise InvariantError("negative state component", step=step, breach=-low)


def _assemble(grid: FloatArray, ys: FloatArray) -> StateTrajectory:
    return StateTrajectory(grid, ys[:, 0, :].copy(), ys[:, 1, :].copy(), ys[:, 2, :].copy())


def integrate(
    initial: NodeState,
    control: ControlTrajectory | None,
    params: SirParams,
    g: Graph,
    rule: RateRule = RateRule.PROPORTIONAL,
) -> StateTrajectory:
    """integrate the network SIR system on the params grid.

    the control is piecewise constant: w(t_k) is applied over [t_k, t_{k+1}].
    None means the uncontrolled system.

    Raises:
        ParameterError: if the control grid or node count does not match
        InvariantError: if conservation or positivity breaks at a grid point
    """
    n = g.node_count
    if initial.node_count != n:
        raise ParameterError(f"initial state has {initial.node_count} nodes, graph has {n}")
    grid = params.grid
    if control is not None:
        if control.weights.shape != (params.steps + 1, n):
            raise ParameterError(
                f"control must have shape {(params.steps + 1, n)}, got {control.weights.shape}"
            )
        if not np.allclose(control.grid, grid, rtol=0.0, atol=1e-12):
            raise ParameterError("control grid does not match the parameter grid")

    adjacency = g.adjacency
    dt = params.dt
    ys = np.empty((params.steps + 1, 3, n))
    ys[0] = np.stack([initial.s, initial.i, initial.r])
    reference = ys[0].sum(axis=0)

    zero = np.zeros(n)
    beta, gamma = rates(zero, params, rule)
    for k in range(params.steps):
        if control is not None:
            beta, gamma = rates(_check_weights(control.weights[k], n), params, rule)
        ys[k + 1] = rk4_step(ys[k], beta, gamma, dt, adjacency)
        _check_invariants(ys[k + 1], reference, k + 1)

    return _assemble(grid, ys)


def simulate_feedback(
    initial: NodeState,
    policy: Callable[[NodeState], FloatArray],
    params: SirParams,
    g: Graph,
    rule: RateRule = RateRule.PROPORTIONAL,
) -> tuple[ControlTrajectory, StateTrajectory]:
    """closed-loop integration.

    the policy is evaluated on the state at every grid point and its weights
    are held over the following interval.

    Returns:
        (realised control, state trajectory)
    """
    n = g.node_count
    if initial.node_count != n:
        raise ParameterError(f"initial state has {initial.node_count} nodes, graph has {n}")
    adjacency = g.adjacency
    dt = params.dt
    ys = np.empty((params.steps + 1, 3, n))
    ws = np.empty((params.steps + 1, n))
    ys[0] = np.stack([initial.s, initial.i, initial.r])
    reference = ys[0].sum(axis=0)

    for k in range(params.steps + 1):
        state = NodeState(ys[k, 0], ys[k, 1], ys[k, 2])
        ws[k] = _check_weights(policy(state), n)
        if k == params.steps:
            break
        beta, gamma = rates(ws[k], params, rule)
        ys[k + 1] = rk4_step(ys[k], beta, gamma, dt, adjacency)
        _check_invariants(ys[k + 1], reference, k + 1)

    grid = params.grid
    return ControlTrajectory(grid, ws), _assemble(grid, ys)


def basic_reproduction_number(params: SirParams, g: Graph, tol: float = DEFAULT_TOL) -> float:
    """R0 = β0/γ0 · ρ(A)."""
    if params.beta0 == 0.0 or g.edge_count == 0:
        return 0.0
    return params.beta0 / params.gamma0 * spectral_radius(g, tol)


def controlled_reproduction_number(
    w: FloatArray, params: SirParams, g: Graph, tol: float = DEFAULT_TOL
) -> float:
    """ρ of the frozen next-generation matrix β0/γ0·diag((1−u·w)/(1+u·w))·A."""
    w = _check_weights(w, g.node_count)
    if params.beta0 == 0.0 or g.edge_count == 0:
        return 0.0
    scale = params.beta0 / params.gamma0 * (1.0 - params.u * w) / (1.0 + params.u * w)
    return scaled_spectral_radius(g, scale, tol)


def effective_reproduction_series(
    control: ControlTrajectory, params: SirParams, g: Graph, tol: float = DEFAULT_TOL
) -> FloatArray:
    """controlled reproduction number at every grid point."""
    return np.array(
        [controlled_reproduction_number(w, params, g, tol) for w in control.weights]
    )


def epidemic_threshold(g: Graph) -> float:
    """β_c = ⟨k⟩ / (⟨k²⟩ − ⟨k⟩).

    Raises:
        GraphError: if ⟨k²⟩ ≤ ⟨k⟩ (e.g. a perfect matching or an edgeless graph)
    """
    k = g.degree.astype(np.float64)
    first = float(k.mean())
    second = float((k * k).mean())
    if second <= first:
        raise GraphError(
            f"epidemic threshold undefined: <k^2>={second:.6g} <= <k>={first:.6g}"
        )
    return first / (second - first)


def uniform_initial_state(n: int, i0: float) -> NodeState:
    """every node starts with I = i0, S = 1 − i0."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if not 0.0 <= i0 <= 1.0:
        raise ParameterError(f"i0 must lie in [0, 1], got {i0}")
    return NodeState(np.full(n, 1.0 - i0), np.full(n, i0), np.zeros(n))


def seeded_initial_state(n: int, nodes: Iterable[int]) -> NodeState:
    """listed nodes start fully infected, every other node susceptible."""
    seeds = [int(v) for v in nodes]
    if len(set(seeds)) != len(seeds):
        raise ParameterError("seed nodes must be distinct")
    if any(not 0 <= v < n for v in seeds):
        raise ParameterError(f"seed nodes must lie in 0..{n - 1}")
    i = np.zeros(n)
    i[seeds] = 1.0
    return NodeState(1.0 - i, i, np.zeros(n))
