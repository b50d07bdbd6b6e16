"""tests for the adjoint system, budget enforcement and the forward-backward sweep."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from sirx._internal.control import (
    AdjointForm,
    FbsConfig,
    adjoint_rhs,
    discrete_gradient,
    enforce_budget,
    fbs_solve,
    integrate_adjoint_backward,
    objective,
    optimality_map,
    quadrature_weights,
    reduced_gradient,
)
from sirx._internal.dynamics import (
    ControlTrajectory,
    NodeState,
    SirParams,
    integrate,
    seeded_initial_state,
    uniform_initial_state,
)
from sirx._internal.errors import ParameterError
from sirx._internal.graph import Graph


@pytest.fixture
def isolated() -> Graph:
    return Graph(1, ())


@pytest.fixture
def edge() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


class TestObjective:
    def test_quadrature_weights(self) -> None:
        """test trapezoid weights sum to the horizon."""
        q = quadrature_weights(np.linspace(0.0, 2.0, 5))
        assert q.tolist() == pytest.approx([0.25, 0.5, 0.5, 0.5, 0.25])

    def test_uncontrolled_closed_form(self, isolated: Graph) -> None:
        """test J = ∫exp(−γt) = 10(1 − e^−1) for a lone infected node."""
        p = SirParams(beta0=0.0, gamma0=0.1, horizon=10.0, steps=200)
        control = ControlTrajectory.zeros(p, 1)
        states = integrate(uniform_initial_state(1, 1.0), control, p, isolated)
        assert objective(states, control, p) == pytest.approx(10.0 * (1.0 - math.exp(-1.0)), abs=1e-4)

    def test_running_cost(self, isolated: Graph) -> None:
        """test a constant weight adds ½·c·w²·T and speeds recovery."""
        p = SirParams(beta0=0.0, gamma0=0.1, u=0.5, c=1.0, horizon=10.0, steps=200)
        control = ControlTrajectory.constant(p, np.array([0.5]))
        states = integrate(uniform_initial_state(1, 1.0), control, p, isolated)
        expected = 8.0 * (1.0 - math.exp(-1.25)) + 0.5 * 0.25 * 10.0
        assert objective(states, control, p) == pytest.approx(expected, abs=1e-4)

    def test_grid_mismatch(self, isolated: Graph) -> None:
        """test states and control on different grids are rejected."""
        p = SirParams(beta0=0.0, gamma0=0.1, steps=10)
        states = integrate(uniform_initial_state(1, 1.0), None, p, isolated)
        other = ControlTrajectory(np.linspace(0.0, 1.0, 11), np.zeros((11, 1)))
        with pytest.raises(ParameterError):
            objective(states, other, p)


class TestEnforceBudget:
    def test_slack_budget(self) -> None:
        """test a budget that does not bind leaves λ4 at zero."""
        w, lam = enforce_budget(np.array([0.2, 0.3]), 1.0, 1.0)
        assert w.tolist() == pytest.approx([0.2, 0.3])
        assert float(lam) == 0.0

    def test_binding_budget(self) -> None:
        """test a binding budget shifts every weight by λ4/c."""
        w, lam = enforce_budget(np.array([0.8, 0.6]), 1.0, 1.0)
        assert w.tolist() == pytest.approx([0.6, 0.4], abs=1e-8)
        assert float(lam) == pytest.approx(0.2, abs=1e-8)

    def test_cost_scales_multiplier(self) -> None:
        """test λ4 scales with c for the same weights."""
        w, lam = enforce_budget(np.array([0.8, 0.6]), 1.0, 2.0)
        assert w.tolist() == pytest.approx([0.6, 0.4], abs=1e-8)
        assert float(lam) == pytest.approx(0.4, abs=1e-8)

    def test_cap_then_shift(self) -> None:
        """test a capped weight stays at 1 while the rest is cut."""
        w, lam = enforce_budget(np.array([2.0, 0.5]), 1.0, 1.0)
        assert w.tolist() == pytest.approx([1.0, 0.0], abs=1e-8)
        assert float(lam) == pytest.approx(0.5, abs=1e-8)

    def test_zero_budget(self) -> None:
        """test w_total = 0 zeroes the weights."""
        w, lam = enforce_budget(np.array([0.4, -0.2]), 0.0, 2.0)
        assert w.tolist() == [0.0, 0.0]
        assert float(lam) == pytest.approx(0.8)

    def test_rows(self) -> None:
        """test each grid row is enforced independently."""
        raw = np.array([[0.2, 0.3], [0.8, 0.6], [-1.0, -1.0]])
        w, lam = enforce_budget(raw, 1.0, 1.0)
        assert w.shape == (3, 2)
        assert lam.shape == (3,)
        assert w.sum(axis=1).tolist() == pytest.approx([0.5, 1.0, 0.0], abs=1e-8)
        assert lam.tolist() == pytest.approx([0.0, 0.2, 0.0], abs=1e-8)

    @pytest.mark.parametrize(
        "raw,w_total,c",
        [(np.array([0.1]), 1.0, 0.0), (np.array([0.1]), -1.0, 1.0), (np.array([np.nan]), 1.0, 1.0)],
    )
    def test_invalid(self, raw: np.ndarray, w_total: float, c: float) -> None:
        """test invalid cost, budget and non-finite candidates."""
        with pytest.raises(ParameterError):
            enforce_budget(raw, w_total, c)


class TestAdjoint:
    def _setup(self) -> tuple[NodeState, tuple[np.ndarray, np.ndarray, np.ndarray], SirParams]:
        state = NodeState(np.array([0.5, 1.0]), np.array([0.5, 0.0]), np.zeros(2))
        lam = (np.array([1.0, 2.0]), np.array([0.0, 1.0]), np.zeros(2))
        params = SirParams(beta0=1.0, gamma0=1.0)
        return state, lam, params

    def test_exact_form_by_hand(self, edge: Graph) -> None:
        """test the exact costate derivative on a single edge."""
        state, lam, params = self._setup()
        d = adjoint_rhs(state, lam, np.zeros(2), params, edge, AdjointForm.EXACT)
        assert d.dl1.tolist() == pytest.approx([0.0, 0.5])
        assert d.dl2.tolist() == pytest.approx([0.0, 0.5])
        assert d.dl3.tolist() == [0.0, 0.0]

    def test_stated_form_by_hand(self, edge: Graph) -> None:
        """test the local-coupling costate derivative on a single edge."""
        state, lam, params = self._setup()
        d = adjoint_rhs(state, lam, np.zeros(2), params, edge, AdjointForm.STATED)
        assert d.dl1.tolist() == pytest.approx([0.0, 0.5])
        assert d.dl2.tolist() == pytest.approx([-1.5, -1.0])

    def test_backward_closed_form(self, isolated: Graph) -> None:
        """test λ2(t) = (1 − exp(−γ(T − t)))/γ without edges."""
        p = SirParams(beta0=0.0, gamma0=0.1, horizon=10.0, steps=200)
        control = ControlTrajectory.zeros(p, 1)
        states = integrate(uniform_initial_state(1, 1.0), control, p, isolated)
        adjoint = integrate_adjoint_backward(states, control, p, isolated)
        expected = (1.0 - np.exp(-0.1 * (10.0 - p.grid))) / 0.1
        assert adjoint.lambda2[:, 0] == pytest.approx(expected, abs=1e-8)
        assert adjoint.lambda1[-1, 0] == 0.0
        assert np.all(adjoint.lambda3 == 0.0)

    def test_optimality_map_clamps(self, edge: Graph) -> None:
        """test the pointwise map stays in [0, 1]."""
        state, lam, params = self._setup()
        w = optimality_map(state, lam, params, edge)
        assert np.all((w >= 0.0) & (w <= 1.0))


class TestReducedGradient:
    def test_matches_finite_differences(self, path3: Graph) -> None:
        """test the adjoint gradient against central differences at interior points."""
        p = SirParams(beta0=0.5, gamma0=0.2, u=0.5, c=10.0, w_total=3.0, horizon=5.0, steps=200)
        initial = uniform_initial_state(3, 0.2)
        base = np.full((p.steps + 1, 3), 0.5)
        control = ControlTrajectory(p.grid, base)
        states = integrate(initial, control, p, path3)
        adjoint = integrate_adjoint_backward(states, control, p, path3)
        grad = reduced_gradient(states, adjoint, control, p, path3)

        def j(weights: np.ndarray) -> float:
            c = ControlTrajectory(p.grid, weights)
            return objective(integrate(initial, c, p, path3), c, p)

        eps = 1e-5
        for k, node in [(40, 1), (100, 0), (150, 2)]:
            up, down = base.copy(), base.copy()
            up[k, node] += eps
            down[k, node] -= eps
            numeric = (j(up) - j(down)) / (2 * eps)
            assert grad[k, node] == pytest.approx(numeric, rel=2e-2)

    def test_last_row_only_cost(self, path3: Graph, params: SirParams) -> None:
        """test the final weight only enters the running cost."""
        control = ControlTrajectory.constant(params, np.full(3, 0.2))
        states = integrate(uniform_initial_state(3, 0.2), control, params, path3)
        adjoint = integrate_adjoint_backward(states, control, params, path3)
        grad = reduced_gradient(states, adjoint, control, params, path3)
        expected = 0.5 * params.dt * params.c * 0.2
        assert grad[-1].tolist() == pytest.approx([expected] * 3)


class TestDiscreteGradient:
    @pytest.fixture
    def setup(self) -> tuple[Graph, SirParams, NodeState, np.ndarray]:
        g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
        p = SirParams(beta0=0.5, gamma0=0.2, u=0.5, c=1.0, w_total=5.0, horizon=2.0, steps=40)
        weights = np.random.default_rng(3).uniform(0.1, 0.9, size=(p.steps + 1, 5))
        return g, p, uniform_initial_state(5, 0.2), weights

    def test_matches_finite_differences(self, setup: tuple) -> None:
        """test the discrete adjoint against central differences at 20 random interior points."""
        g, p, initial, base = setup
        control = ControlTrajectory(p.grid, base)
        grad = discrete_gradient(integrate(initial, control, p, g), control, p, g)

        def j(weights: np.ndarray) -> float:
            c = ControlTrajectory(p.grid, weights)
            return objective(integrate(initial, c, p, g), c, p)

        rng = np.random.default_rng(11)
        eps = 1e-5
        for _ in range(20):
            k, node = int(rng.integers(1, p.steps)), int(rng.integers(5))
            up, down = base.copy(), base.copy()
            up[k, node] += eps
            down[k, node] -= eps
            numeric = (j(up) - j(down)) / (2 * eps)
            assert grad[k, node] == pytest.approx(numeric, rel=1e-3)

    def test_close_to_costate_quadrature(self, setup: tuple) -> None:
        """test the costate-based gradient approximates the exact discrete one."""
        g, p, initial, base = setup
        control = ControlTrajectory(p.grid, base)
        states = integrate(initial, control, p, g)
        adjoint = integrate_adjoint_backward(states, control, p, g)
        exact = discrete_gradient(states, control, p, g)
        approx = reduced_gradient(states, adjoint, control, p, g)
        assert np.abs(approx - exact).max() < 0.05 * np.abs(exact).max()

    def test_last_row_only_cost(self, setup: tuple) -> None:
        """test the final weight only enters the running cost."""
        g, p, initial, base = setup
        control = ControlTrajectory(p.grid, base)
        grad = discrete_gradient(integrate(initial, control, p, g), control, p, g)
        assert grad[-1] == pytest.approx(0.5 * p.dt * p.c * base[-1])


class TestFbsSolve:
    def test_no_infection_gives_zero_control(self, path3: Graph, params: SirParams) -> None:
        """test an all-susceptible start needs no intervention."""
        solution = fbs_solve(path3, params, seeded_initial_state(3, []))
        assert np.all(solution.control.weights == 0.0)
        assert solution.report.converged
        assert solution.report.iterations == 1

    def test_no_intensity_gives_zero_control(self, path3: Graph) -> None:
        """test u = 0 makes the weights irrelevant, so none are spent."""
        p = SirParams(beta0=0.5, gamma0=0.2, u=0.0, horizon=5.0, steps=50)
        solution = fbs_solve(path3, p, uniform_initial_state(3, 0.2))
        assert np.all(solution.control.weights == 0.0)

    def test_solution_is_admissible(self, karate: Graph) -> None:
        """test bounds, budget and a nonnegative multiplier on karate."""
        p = SirParams(beta0=0.1, gamma0=0.1, w_total=2.0, horizon=10.0, steps=100)
        solution = fbs_solve(karate, p, uniform_initial_state(karate.node_count, 0.05))
        solution.control.validate(p.w_total, tol=1e-8)
        assert np.all(solution.adjoint.lambda4 >= 0.0)
        assert solution.adjoint.lambda4.shape == (p.steps + 1,)
        assert solution.report.history[0].iteration == 1
        assert solution.report.objective == pytest.approx(
            objective(solution.states, solution.control, p)
        )

    def test_multiplier_complementary_slackness(self, karate: Graph) -> None:
        """test λ4 > 0 only where the returned control spends the whole budget."""
        p = SirParams(beta0=0.3, gamma0=0.1, w_total=2.0, horizon=10.0, steps=100)
        solution = fbs_solve(karate, p, uniform_initial_state(karate.node_count, 0.05))
        lambda4 = solution.adjoint.lambda4
        spent = solution.control.weights.sum(axis=1)
        assert np.any(lambda4 > 0.0)
        assert np.all(np.abs(spent - p.w_total) * lambda4 < 1e-6)
        assert np.allclose(spent[lambda4 > 0.0], p.w_total, atol=1e-8)

    def test_beats_two_segment_controls(self, path3: Graph) -> None:
        """test the sweep is no worse than any budget-feasible two-segment allocation."""
        p = SirParams(beta0=1.0, gamma0=0.3, u=0.8, c=0.5, w_total=1.0, horizon=5.0, steps=100)
        initial = uniform_initial_state(3, 0.2)
        solution = fbs_solve(path3, p, initial, FbsConfig(max_iterations=300))

        levels = [0.0, 0.25, 0.5, 0.75, 1.0]
        feasible = [w for w in itertools.product(levels, repeat=3) if sum(w) <= p.w_total + 1e-12]
        half = p.steps // 2
        best = math.inf
        for first, second in itertools.product(feasible, repeat=2):
            weights = np.empty((p.steps + 1, 3))
            weights[:half] = first
            weights[half:] = second
            control = ControlTrajectory(p.grid, weights)
            best = min(best, objective(integrate(initial, control, p, path3), control, p))
        assert solution.report.objective <= best + 1e-3

    def test_stated_form_runs(self, path3: Graph, params: SirParams) -> None:
        """test the alternative costate equation yields an admissible control."""
        cfg = FbsConfig(adjoint_form=AdjointForm.STATED)
        solution = fbs_solve(path3, params, uniform_initial_state(3, 0.2), cfg)
        solution.control.validate(params.w_total, tol=1e-8)

    def test_iteration_cap_reports_not_converged(self, karate: Graph) -> None:
        """test hitting the cap returns the last iterate instead of raising."""
        p = SirParams(beta0=0.1, gamma0=0.1, horizon=10.0, steps=50)
        cfg = FbsConfig(max_iterations=1, tolerance=1e-12)
        solution = fbs_solve(karate, p, uniform_initial_state(karate.node_count, 0.05), cfg)
        assert not solution.report.converged
        assert solution.report.iterations == 1

    def test_inadmissible_start(self, path3: Graph, params: SirParams) -> None:
        """test a starting control over budget is rejected."""
        w_init = ControlTrajectory.constant(params, np.ones(3))
        with pytest.raises(ParameterError):
            fbs_solve(path3, params, uniform_initial_state(3, 0.2), w_init=w_init)
