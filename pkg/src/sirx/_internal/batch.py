"""concurrent strategy runs over shared immutable inputs."""

from __future__ import annotations

import asyncio
from collections.abc import Sequence
from dataclasses import dataclass

from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TaskID,
    TextColumn,
    TimeRemainingColumn,
)

from sirx._internal.baselines import CentralityCache, StrategyRun, StrategySpec, run_strategy
from sirx._internal.centrality import compute_centrality
from sirx._internal.dynamics import NodeState, SirParams
from sirx._internal.graph import Graph
from sirx._internal.logging import get_logger, stderr_console

logger = get_logger(__name__)


@dataclass
class BatchResult:
    """result of a batch of strategy runs."""

    successful: list[StrategyRun]
    failed: list[tuple[str, Exception]]

    @property
    def total(self) -> int:
        """total runs attempted."""
        return len(self.successful) + len(self.failed)

    @property
    def success_rate(self) -> float:
        """success rate as percentage."""
        return len(self.successful) / self.total * 100 if self.total > 0 else 0


async def run_strategies(
    specs: Sequence[StrategySpec],
    g: Graph,
    params: SirParams,
    initial: NodeState,
    *,
    cache: CentralityCache | None = None,
    concurrency: int = 4,
    fail_fast: bool = False,
    show_progress: bool = True,
) -> BatchResult:
    """run strategies concurrently in worker threads.

    Args:
        specs: strategies to run
        g: network shared by every run
        params: model parameters
        initial: initial state shared by every run
        cache: centrality vectors shared across the ± strategies
        concurrency: maximum concurrent runs (default: 4)
        fail_fast: stop on first error (default: False)
        show_progress: show progress bar (default: True)

    Returns:
        batch result with runs and failures in the order of `specs`
    """
    successful: dict[int, StrategyRun] = {}
    failed: dict[int, tuple[str, Exception]] = {}
    semaphore = asyncio.Semaphore(concurrency)
    shared_cache: CentralityCache = cache if cache is not None else {}
    # centralities are filled under one lock so each is computed once
    cache_lock = asyncio.Lock()

    progress: Progress | None = None
    task_id: TaskID | None = None

    if show_progress:
        progress = Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeRemainingColumn(),
            console=stderr_console,
        )
        progress.start()
        task_id = progress.add_task("running strategies", total=len(specs))

    async def prepare(spec: StrategySpec) -> None:
        metric = spec.kind.metric
        if metric is None:
            return
        async with cache_lock:
            if metric not in shared_cache:
                shared_cache[metric] = await asyncio.to_thread(
                    compute_centrality, g, metric, max_len=spec.options.cycle_max_len
                )

    async def run_one(index: int, spec: StrategySpec) -> None:
        """run a single strategy with concurrency control."""
        async with semaphore:
            try:
                await prepare(spec)
                run = await asyncio.to_thread(
                    run_strategy, spec, g, params, initial, cache=shared_cache
                )
                successful[index] = run
            except Exception as e:
                logger.error("strategy %s failed: %s", spec.name, e)
                failed[index] = (spec.name, e)
                if fail_fast:
                    raise
            finally:
                if progress and task_id is not None:
                    progress.update(task_id, advance=1)

    try:
        await asyncio.gather(*[run_one(i, spec) for i, spec in enumerate(specs)])
    except Exception:
        # fail_fast raised an exception
        pass
    finally:
        if progress:
            progress.stop()

    return BatchResult(
        successful=[successful[i] for i in sorted(successful)],
        failed=[failed[i] for i in sorted(failed)],
    )


def display_batch_result(
    failures: Sequence[tuple[str, Exception]], total: int, operation: str
) -> None:
    """display batch run summary.

    Args:
        failures: (strategy, error) pairs
        total: strategies attempted
        operation: what was run (e.g. "compared")
    """
    console = stderr_console
    if failures:
        console.print(f"\n[yellow]⚠[/yellow] {operation} {total - len(failures)}/{total} strategies")
        for name, error in failures:
            console.print(f"  [red]✗[/red] {name}: {error}")
    else:
        console.print(f"\n[green]✓[/green] {operation} {total} strategies")
