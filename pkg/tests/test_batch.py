"""tests for concurrent strategy runs."""

from __future__ import annotations

import pytest

from sirx._internal import batch
from sirx._internal.baselines import StrategyKind, StrategySpec, run_strategy
from sirx._internal.batch import BatchResult, display_batch_result, run_strategies
from sirx._internal.centrality import CentralityMetric
from sirx._internal.dynamics import SirParams, uniform_initial_state
from sirx._internal.graph import Graph


@pytest.fixture
def small() -> SirParams:
    return SirParams(beta0=0.3, gamma0=0.1, w_total=1.0, horizon=4.0, steps=40)


def specs(*names: str) -> list[StrategySpec]:
    return [StrategySpec(StrategyKind(name)) for name in names]


class TestRunStrategies:
    """tests for run_strategies."""

    async def test_all_successful(self, karate: Graph, small: SirParams) -> None:
        """test every strategy runs and results keep the input order."""
        initial = uniform_initial_state(karate.node_count, 0.1)
        result = await run_strategies(
            specs("unc", "dc+", "un", "dc-"), karate, small, initial, concurrency=2, show_progress=False
        )
        assert [run.name for run in result.successful] == ["unc", "dc+", "un", "dc-"]
        assert result.failed == []
        assert result.total == 4
        assert result.success_rate == 100.0

    async def test_cache_filled_once(self, karate: Graph, small: SirParams, mocker) -> None:
        """test the ± strategies share one centrality computation."""
        spy = mocker.spy(batch, "compute_centrality")
        cache: dict = {}
        initial = uniform_initial_state(karate.node_count, 0.1)
        await run_strategies(
            specs("bc+", "bc-"), karate, small, initial, cache=cache, show_progress=False
        )
        assert spy.call_count == 1
        assert CentralityMetric.BC in cache

    async def test_with_failures(self, path3: Graph, small: SirParams, mocker) -> None:
        """test a failing strategy is reported and the others still run."""

        def flaky(spec: StrategySpec, *args, **kwargs):
            if spec.kind is StrategyKind.UN:
                raise ValueError("simulated failure")
            return run_strategy(spec, *args, **kwargs)

        mocker.patch("sirx._internal.batch.run_strategy", side_effect=flaky)
        initial = uniform_initial_state(3, 0.1)
        result = await run_strategies(specs("unc", "un", "dra"), path3, small, initial, show_progress=False)

        assert [run.name for run in result.successful] == ["unc", "dra"]
        assert len(result.failed) == 1
        assert result.failed[0][0] == "un"
        assert isinstance(result.failed[0][1], ValueError)
        assert result.success_rate == pytest.approx(66.67, rel=0.01)

    async def test_fail_fast(self, path3: Graph, small: SirParams, mocker) -> None:
        """test fail_fast stops with the first error recorded."""
        mocker.patch("sirx._internal.batch.run_strategy", side_effect=RuntimeError("boom"))
        initial = uniform_initial_state(3, 0.1)
        result = await run_strategies(
            specs("unc", "un"), path3, small, initial, concurrency=1, fail_fast=True, show_progress=False
        )
        assert result.successful == []
        assert 1 <= len(result.failed) <= 2
        assert isinstance(result.failed[0][1], RuntimeError)


class TestBatchResult:
    def test_empty(self) -> None:
        """test an empty batch has a zero success rate."""
        result = BatchResult(successful=[], failed=[])
        assert result.total == 0
        assert result.success_rate == 0


class TestDisplayBatchResult:
    def test_all_ok(self, capsys: pytest.CaptureFixture[str]) -> None:
        """test the success line counts every strategy."""
        display_batch_result([], 3, "compared")
        assert "compared 3 strategies" in capsys.readouterr().err

    def test_failures_listed(self, capsys: pytest.CaptureFixture[str]) -> None:
        """test each failure gets its own line."""
        display_batch_result([("dra", ValueError("bad order"))], 4, "simulated")
        err = capsys.readouterr().err
        assert "simulated 3/4 strategies" in err
        assert "dra: bad order" in err
