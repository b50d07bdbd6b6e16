"""adjoint system, pointwise optimality with budget enforcement, and the forward-backward sweep."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid

from sirx._internal.dynamics import (
    ControlTrajectory,
    NodeState,
    SirParams,
    StateTrajectory,
    _field,
    integrate,
    rates,
)
from sirx._internal.errors import ConvergenceError, InvariantError, ParameterError, SolverError
from sirx._internal.graph import Graph
from sirx._internal.logging import get_logger
from sirx._internal.types import FloatArray

logger = get_logger(__name__)

BUDGET_TOL = 1e-8
_BISECTION_MAX_ITER = 200


class AdjointForm(str, Enum):
    """which λ2 costate equation the backward sweep integrates.

    `exact` is −∂H/∂I_i; `stated` carries a local coupling term
    −(λ1_i − λ2_i)·β_i·S_i·k_i in its place.
    """

    EXACT = "exact"
    STATED = "stated"


class FbsConfig(BaseModel):
    """forward-backward sweep settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    tolerance: float = Field(default=1e-3, gt=0.0, description="relative control change to stop at")
    relaxation: float = Field(default=0.5, gt=0.0, le=1.0, description="weight τ of the previous iterate")
    max_iterations: int = Field(default=100, ge=1)
    adjoint_form: AdjointForm = AdjointForm.EXACT


@dataclass(frozen=True)
class AdjointTrajectory:
    """costates on the grid; lambda1..3 have shape (K+1, N), lambda4 shape (K+1,)."""

    grid: FloatArray
    lambda1: FloatArray
    lambda2: FloatArray
    lambda3: FloatArray
    lambda4: FloatArray

    def slice_at(self, k: int) -> tuple[FloatArray, FloatArray, FloatArray]:
        return self.lambda1[k], self.lambda2[k], self.lambda3[k]


class AdjointDerivative(NamedTuple):
    dl1: FloatArray
    dl2: FloatArray
    dl3: FloatArray


class FbsIteration(NamedTuple):
    iteration: int
    objective: float
    rel_change: float
    lambda4_max: float


@dataclass(frozen=True)
class FbsReport:
    iterations: int
    converged: bool
    objective: float
    history: tuple[FbsIteration, ...]


class FbsSolution(NamedTuple):
    control: ControlTrajectory
    states: StateTrajectory
    adjoint: AdjointTrajectory
    report: FbsReport


def _check_grids(states: StateTrajectory, control: ControlTrajectory) -> None:
    if states.grid.shape != control.grid.shape or not np.allclose(
        states.grid, control.grid, rtol=0.0, atol=1e-12
    ):
        raise ParameterError("state and control grids do not match")
    if control.node_count != states.node_count:
        raise ParameterError(
            f"control has {control.node_count} nodes, states have {states.node_count}"
        )


def quadrature_weights(grid: FloatArray) -> FloatArray:
    """trapezoid weights q_k with Σ_k q_k·f_k ≈ ∫f."""
    spacing = np.diff(grid)
    q = np.zeros(grid.size)
    q[:-1] += spacing / 2.0
    q[1:] += spacing / 2.0
    return q


def objective(states: StateTrajectory, control: ControlTrajectory, params: SirParams) -> float:
    """J = ∫ (Σ_i I_i + ½·c·Σ_i w_i²) dt by the trapezoidal rule."""
    _check_grids(states, control)
    integrand = states.i.sum(axis=1) + 0.5 * params.c * (control.weights**2).sum(axis=1)
    return float(trapezoid(integrand, states.grid))


def _adjoint_field(
    s: FloatArray,
    i: FloatArray,
    lam: FloatArray,
    beta: FloatArray,
    gamma: FloatArray,
    g: Graph,
    form: AdjointForm,
) -> FloatArray:
    """derivative of the stacked (3, N) costate."""
    gap = lam[0] - lam[1]
    dl1 = gap * beta * (g.adjacency @ i)
    if form is AdjointForm.EXACT:
        dl2 = -1.0 + gamma * (lam[1] - lam[2]) + g.adjacency @ (beta * s * gap)
    else:
        dl2 = -1.0 + lam[1] * gamma - gap * beta * s * g.degree - lam[2] * gamma
    return np.stack([dl1, dl2, np.zeros_like(dl1)])


def adjoint_rhs(
    state: NodeState,
    adjoint: tuple[FloatArray, FloatArray, FloatArray],
    w: FloatArray,
    params: SirParams,
    g: Graph,
    form: AdjointForm = AdjointForm.EXACT,
) -> AdjointDerivative:
    """costate derivatives at one time; dλ3/dt is identically zero."""
    beta, gamma = rates(np.asarray(w, dtype=np.float64), params)
    d = _adjoint_field(state.s, state.i, np.stack(adjoint), beta, gamma, g, form)
    return AdjointDerivative(d[0], d[1], d[2])


def hermite_midpoints(
    states: StateTrajectory, control: ControlTrajectory, params: SirParams, g: Graph
) -> tuple[FloatArray, FloatArray]:
    """S and I at every interval midpoint by cubic hermite interpolation.

    derivatives at both interval ends are taken under the interval's control.
    """
    beta, gamma = rates(control.weights[:-1], params)
    force = g.neighbor_sum(states.i)
    s0, s1 = states.s[:-1], states.s[1:]
    i0, i1 = states.i[:-1], states.i[1:]
    ds0 = -beta * s0 * force[:-1]
    ds1 = -beta * s1 * force[1:]
    di0 = -ds0 - gamma * i0
    di1 = -ds1 - gamma * i1
    dt = np.diff(states.grid)[:, None]
    s_mid = 0.5 * (s0 + s1) + dt / 8.0 * (ds0 - ds1)
    i_mid = 0.5 * (i0 + i1) + dt / 8.0 * (di0 - di1)
    return s_mid, i_mid


def integrate_adjoint_backward(
    states: StateTrajectory,
    control: ControlTrajectory,
    params: SirParams,
    g: Graph,
    form: AdjointForm = AdjointForm.EXACT,
    *,
    iteration: int | None = None,
) -> AdjointTrajectory:
    """RK4 from λ(T) = 0 backward to t = 0 over the state grid.

    lambda4 is returned as zeros; the sweep fills it from the budget step.

    Raises:
        SolverError: if a costate becomes non-finite
    """
    _check_grids(states, control)
    steps = states.steps
    n = states.node_count
    beta, gamma = rates(control.weights[:-1], params)
    s_mid, i_mid = hermite_midpoints(states, control, params, g)

    lam = np.zeros((steps + 1, 3, n))
    for k in range(steps - 1, -1, -1):
        dt = float(states.grid[k + 1] - states.grid[k])
        b, gm = beta[k], gamma[k]
        y = lam[k + 1]
        k1 = _adjoint_field(states.s[k + 1], states.i[k + 1], y, b, gm, g, form)
        k2 = _adjoint_field(s_mid[k], i_mid[k], y - 0.5 * dt * k1, b, gm, g, form)
        k3 = _adjoint_field(s_mid[k], i_mid[k], y - 0.5 * dt * k2, b, gm, g, form)
        k4 = _adjoint_field(states.s[k], states.i[k], y - dt * k3, b, gm, g, form)
        lam[k] = y - (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(lam[k])):
            raise SolverError(f"non-finite adjoint at grid index {k}", iteration=iteration)

    if np.any(lam[:, 2] != 0.0):
        raise SolverError("lambda3 drifted from zero", iteration=iteration)

    return AdjointTrajectory(
        grid=states.grid,
        lambda1=lam[:, 0].copy(),
        lambda2=lam[:, 1].copy(),
        lambda3=lam[:, 2].copy(),
        lambda4=np.zeros(steps + 1),
    )


def hamiltonian_dynamics_gradient(
    s: FloatArray,
    i: FloatArray,
    lambda1: FloatArray,
    lambda2: FloatArray,
    lambda3: FloatArray,
    params: SirParams,
    g: Graph,
) -> FloatArray:
    """the control-dependent part of ∂H/∂w_i, without the cost and λ4 terms.

    β0·u·S_i·(A·I)_i·(λ1_i − λ2_i) − γ0·u·I_i·(λ2_i − λ3_i); works row-wise
    on (K+1, N) stacks.
    """
    force = g.neighbor_sum(i)
    return params.beta0 * params.u * s * force * (lambda1 - lambda2) - params.gamma0 * params.u * i * (
        lambda2 - lambda3
    )


def optimality_map(
    state: NodeState,
    adjoint: tuple[FloatArray, FloatArray, FloatArray],
    params: SirParams,
    g: Graph,
    lambda4: float = 0.0,
) -> FloatArray:
    """stationary point of H in w_i, shifted by −λ4/c and clamped to [0, 1]."""
    raw = -hamiltonian_dynamics_gradient(state.s, state.i, *adjoint, params, g) / params.c
    return np.clip(raw - lambda4 / params.c, 0.0, 1.0)


def enforce_budget(raw: FloatArray, w_total: float, c: float) -> tuple[FloatArray, FloatArray]:
    """pick λ4 ≥ 0 so that Σ_i clamp(raw_i − λ4/c) respects the budget.

    `raw` holds the unclamped candidates at λ4 = 0, either one vector or one
    row per grid point. a slack row keeps λ4 = 0; a binding row is bisected
    until the clamped sum meets `w_total` within 1e-8.

    Returns:
        (weights shaped like `raw`, λ4 shaped like `raw.shape[:-1]`)

    Raises:
        ConvergenceError: if bisection cannot meet the budget
    """
    if c <= 0:
        raise ParameterError(f"c must be positive, got {c}")
    if w_total < 0:
        raise ParameterError(f"w_total must be nonnegative, got {w_total}")
    values = np.asarray(raw, dtype=np.float64)
    rows = np.atleast_2d(values)
    if not np.all(np.isfinite(rows)):
        raise ParameterError("candidate weights must be finite")

    weights = np.clip(rows, 0.0, 1.0)
    lam = np.zeros(rows.shape[0])

    if w_total == 0.0:
        weights = np.zeros_like(rows)
        lam = c * np.maximum(rows.max(axis=1), 0.0)
    else:
        binding = weights.sum(axis=1) > w_total
        if np.any(binding):
            r = rows[binding]
            lo = np.zeros(r.shape[0])
            # at λ4 = c·max(raw) every clamped weight is zero
            hi = c * r.max(axis=1)
            for _ in range(_BISECTION_MAX_ITER):
                mid = 0.5 * (lo + hi)
                over = np.clip(r - mid[:, None] / c, 0.0, 1.0).sum(axis=1) > w_total
                lo = np.where(over, mid, lo)
                hi = np.where(over, hi, mid)
                if np.all(hi - lo <= 1e-15 * np.maximum(1.0, hi)):
                    break
            fitted = np.clip(r - hi[:, None] / c, 0.0, 1.0)
            gap = np.abs(fitted.sum(axis=1) - w_total)
            if np.any(gap > BUDGET_TOL):
                raise ConvergenceError(
                    f"budget bisection missed w_total by {float(gap.max()):.3e}",
                    last_iterate=hi,
                    iterations=_BISECTION_MAX_ITER,
                )
            weights[binding] = fitted
            lam[binding] = hi

    if values.ndim == 1:
        return weights[0], lam.reshape(())
    return weights, lam


def reduced_gradient(
    states: StateTrajectory,
    adjoint: AdjointTrajectory,
    control: ControlTrajectory,
    params: SirParams,
    g: Graph,
) -> FloatArray:
    """adjoint-based gradient of the discrete J with respect to each w_i(t_k).

    the running-cost term uses the trapezoid weight of t_k; the dynamics term
    is the trapezoid of ∂H/∂w over the segment [t_k, t_{k+1}] that w(t_k)
    drives, so the last row only carries cost.
    """
    _check_grids(states, control)
    h = hamiltonian_dynamics_gradient(
        states.s, states.i, adjoint.lambda1, adjoint.lambda2, adjoint.lambda3, params, g
    )
    q = quadrature_weights(states.grid)
    grad = q[:, None] * params.c * control.weights
    dt = np.diff(states.grid)[:, None]
    grad[:-1] += 0.5 * dt * (h[:-1] + h[1:])
    return grad


def _field_vjp(
    y: FloatArray,
    v: FloatArray,
    beta: FloatArray,
    gamma: FloatArray,
    params: SirParams,
    g: Graph,
) -> tuple[FloatArray, FloatArray]:
    """pull a (3, N) cotangent of the state field back to the state and the weights."""
    s, i = y[0], y[1]
    force = g.adjacency @ i
    infect = v[1] - v[0]
    recover = v[2] - v[1]
    grad_y = np.zeros_like(y)
    grad_y[0] = infect * beta * force
    grad_y[1] = g.adjacency @ (infect * beta * s) + recover * gamma
    grad_w = -params.beta0 * params.u * infect * s * force + params.gamma0 * params.u * recover * i
    return grad_y, grad_w


def _rk4_step_vjp(
    y: FloatArray,
    bar: FloatArray,
    beta: FloatArray,
    gamma: FloatArray,
    params: SirParams,
    g: Graph,
) -> tuple[FloatArray, FloatArray]:
    """reverse pass of one RK4 step: cotangent of y_{k+1} to (y_k, w_k)."""
    dt = params.dt
    adjacency = g.adjacency
    y1 = y + 0.5 * dt * _field(y, beta, gamma, adjacency)
    y2 = y + 0.5 * dt * _field(y1, beta, gamma, adjacency)
    y3 = y + dt * _field(y2, beta, gamma, adjacency)

    grad_y = bar.copy()
    grad_w = np.zeros(y.shape[1])
    k1_bar = dt / 6.0 * bar
    k2_bar = dt / 3.0 * bar
    k3_bar = dt / 3.0 * bar

    gy, gw = _field_vjp(y3, dt / 6.0 * bar, beta, gamma, params, g)
    grad_y += gy
    grad_w += gw
    k3_bar = k3_bar + dt * gy

    gy, gw = _field_vjp(y2, k3_bar, beta, gamma, params, g)
    grad_y += gy
    grad_w += gw
    k2_bar = k2_bar + 0.5 * dt * gy

    gy, gw = _field_vjp(y1, k2_bar, beta, gamma, params, g)
    grad_y += gy
    grad_w += gw
    k1_bar = k1_bar + 0.5 * dt * gy

    gy, gw = _field_vjp(y, k1_bar, beta, gamma, params, g)
    grad_y += gy
    grad_w += gw
    return grad_y, grad_w


def discrete_gradient(
    states: StateTrajectory,
    control: ControlTrajectory,
    params: SirParams,
    g: Graph,
) -> FloatArray:
    """exact gradient of the discrete J by a discrete adjoint through the RK4 steps.

    unlike `reduced_gradient` it carries no quadrature error in the costates,
    so it matches finite differences of `objective` to rounding. proportional
    rate rule only.
    """
    _check_grids(states, control)
    w = control.weights
    q = quadrature_weights(states.grid)
    ys = np.stack([states.s, states.i, states.r], axis=1)
    grad = q[:, None] * params.c * w

    bar = np.zeros_like(ys[-1])
    bar[1] = q[-1]
    for k in range(ys.shape[0] - 2, -1, -1):
        beta, gamma = rates(w[k], params)
        bar, grad_w = _rk4_step_vjp(ys[k], bar, beta, gamma, params, g)
        grad[k] += grad_w
        bar[1] += q[k]
    return grad


def _forward(
    initial: NodeState,
    control: ControlTrajectory,
    params: SirParams,
    g: Graph,
    iteration: int,
) -> StateTrajectory:
    try:
        return integrate(initial, control, params, g)
    except InvariantError as e:
        if np.isinf(e.breach):
            raise SolverError("non-finite state in forward sweep", iteration=iteration) from e
        raise


def fbs_solve(
    g: Graph,
    params: SirParams,
    initial: NodeState,
    cfg: FbsConfig | None = None,
    w_init: ControlTrajectory | None = None,
) -> FbsSolution:
    """forward-backward sweep for the budgeted node-level control problem.

    each iteration integrates the states under the current control, the
    costates backward from zero, maps them through the clamped optimality
    condition with the budget multiplier, and relaxes:
    w ← τ·w + (1 − τ)·w̃. iteration stops once ‖Δw‖/‖w_old‖ < tolerance
    (L2 over all node-time entries). a zero previous iterate only passes when
    the new iterate is also zero.

    Args:
        g: network
        params: model parameters
        initial: initial state
        cfg: sweep settings (defaults when None)
        w_init: admissible starting control (zero control when None)

    Returns:
        the last budget-projected map w̃ with the λ4 that produced it, its states,
        costates and report, converged or not

    Raises:
        ParameterError: if `w_init` is not admissible
        SolverError: if states or costates become non-finite
    """
    cfg = cfg or FbsConfig()
    n = g.node_count
    if w_init is None:
        w_init = ControlTrajectory.zeros(params, n)
    w_init.validate(params.w_total)
    grid = params.grid
    w = w_init.weights.copy()
    tau = cfg.relaxation
    lambda4 = np.zeros(params.steps + 1)
    projected = w

    history: list[FbsIteration] = []
    converged = False
    for iteration in range(1, cfg.max_iterations + 1):
        control = ControlTrajectory(grid, w)
        states = _forward(initial, control, params, g, iteration)
        current = objective(states, control, params)
        adjoint = integrate_adjoint_backward(
            states, control, params, g, cfg.adjoint_form, iteration=iteration
        )
        raw = -hamiltonian_dynamics_gradient(
            states.s, states.i, adjoint.lambda1, adjoint.lambda2, adjoint.lambda3, params, g
        ) / params.c
        projected, lambda4 = enforce_budget(raw, params.w_total, params.c)
        updated = tau * w + (1.0 - tau) * projected

        previous_norm = float(np.linalg.norm(w))
        change = float(np.linalg.norm(updated - w))
        if previous_norm > 0.0:
            rel_change = change / previous_norm
        else:
            rel_change = 0.0 if float(np.linalg.norm(updated)) == 0.0 else float("inf")

        history.append(FbsIteration(iteration, current, rel_change, float(lambda4.max())))
        logger.debug(
            "fbs iteration %d: J=%.6g rel_change=%.3e lambda4_max=%.3g",
            iteration,
            current,
            rel_change,
            float(lambda4.max()),
        )
        w = updated
        if rel_change < cfg.tolerance:
            converged = True
            break

    # the relaxed mix of two admissible rows can leave the budget slack where λ4 > 0
    control = ControlTrajectory(grid, projected)
    states = _forward(initial, control, params, g, len(history))
    adjoint = integrate_adjoint_backward(
        states, control, params, g, cfg.adjoint_form, iteration=len(history)
    )
    adjoint = dataclasses.replace(adjoint, lambda4=lambda4)
    final = objective(states, control, params)

    if converged:
        logger.info("fbs converged after %d iterations (J=%.6g)", len(history), final)
    else:
        logger.warning(
            "fbs did not converge within %d iterations (last relative change %.3e)",
            cfg.max_iterations,
            history[-1].rel_change,
        )

    report = FbsReport(
        iterations=len(history), converged=converged, objective=final, history=tuple(history)
    )
    return FbsSolution(control, states, adjoint, report)
