"""command orchestration: network resolution, runs, and result files."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from sirx._internal.analysis import (
    CorrelationSeries,
    DegreeClassSeries,
    MetricsReport,
    aggregate_trajectories,
    build_metrics_report,
    correlation_series,
    degree_class_series,
    window_mean,
)
from sirx._internal.baselines import CentralityCache, StrategyKind, StrategyRun, run_strategy
from sirx._internal.batch import BatchResult, run_strategies
from sirx._internal.centrality import compute_centrality
from sirx._internal.config import ExperimentConfig, GeneratorSpec, settings
from sirx._internal.control import FbsSolution, fbs_solve
from sirx._internal.dynamics import SirParams, StateTrajectory
from sirx._internal.errors import ConfigError
from sirx._internal.graph import DATASETS, EXTERNAL_DATASETS, Graph, load_dataset, load_edge_list
from sirx._internal.logging import get_logger
from sirx._internal.output import (
    adjoint_table,
    control_table,
    correlation_table,
    degree_class_table,
    fbs_table,
    metrics_table,
    trajectory_table,
    write_csv,
    write_manifest,
)
from sirx._internal.parsing import parse_key_value_args
from sirx._internal.types import FloatArray

logger = get_logger(__name__)

GENERATOR_KINDS = ("ba", "ws", "er")


def load_network(source: Sequence[str]) -> tuple[Graph, str]:
    """resolve a CLI network source: a path, a dataset name, or `kind key=value ...`.

    Returns:
        (graph, short description)

    Raises:
        ConfigError: for stray key=value arguments or bad generator parameters
        FileNotFoundError: if a path does not exist
    """
    if not source:
        raise ConfigError("no network source given")
    head, rest = source[0], list(source[1:])
    if head.lower() in GENERATOR_KINDS:
        params = parse_key_value_args(rest)
        try:
            spec = GeneratorSpec.model_validate({"kind": head.lower(), **params})
        except ValueError as e:
            raise ConfigError(f"invalid {head} generator arguments: {e}") from e
        return spec.build(), f"{head.lower()}({', '.join(rest)})"
    if rest:
        raise ConfigError(f"unexpected arguments after {head}: {' '.join(rest)}")
    if not Path(head).exists() and head.lower() in (*DATASETS, *EXTERNAL_DATASETS):
        return load_dataset(head, settings.data_dir), head.lower()
    return load_edge_list(head), head


def file_stem(name: str) -> str:
    """filesystem-safe strategy name (dc+ → dc_plus)."""
    return name.replace("+", "_plus").replace("-", "_minus")


def resolve_output_dir(cfg: ExperimentConfig, default: Path) -> Path:
    return cfg.output_dir if cfg.output_dir is not None else default


@dataclass
class ComparisonResult:
    """runs of the first replication, curves averaged over all replications."""

    graph: Graph
    params: SirParams
    runs: dict[str, StrategyRun]
    curves: dict[str, FloatArray]
    failures: list[tuple[str, Exception]]
    generator_seeds: list[int] = field(default_factory=list)
    metrics: MetricsReport | None = None

    @property
    def solution(self) -> FbsSolution | None:
        run = self.runs.get(StrategyKind.OPTIMAL.value)
        return run.solution if run is not None else None


async def run_comparison(
    cfg: ExperimentConfig,
    *,
    concurrency: int,
    show_progress: bool = False,
    with_metrics: bool = True,
) -> ComparisonResult:
    """run every configured strategy on identical inputs, once per replication.

    a strategy that fails in any replication is reported and left out of the
    curves and metrics.
    """
    specs = cfg.strategy_specs()
    names = [spec.name for spec in specs]
    densities: dict[str, list[StateTrajectory]] = {name: [] for name in names}
    failures: dict[str, Exception] = {}
    first: BatchResult | None = None
    graph: Graph | None = None
    params: SirParams | None = None
    generator_seeds: list[int] = []
    cache: CentralityCache = {}

    for replication in range(cfg.replications):
        if graph is None or cfg.network.is_stochastic:
            graph = cfg.network.load(replication)
            params = cfg.params.resolve(graph)
            cache = {}
            if cfg.network.generator is not None:
                generator_seeds.append(cfg.network.generator.seed + replication)
        assert params is not None
        initial = cfg.initial.build(graph.node_count, cfg.seed, replication)
        logger.info("replication %d/%d", replication + 1, cfg.replications)

        batch = await run_strategies(
            specs,
            graph,
            params,
            initial,
            cache=cache,
            concurrency=concurrency,
            show_progress=show_progress,
        )
        for run in batch.successful:
            densities[run.name].append(run.states)
        for name, error in batch.failed:
            failures.setdefault(name, error)
        if first is None:
            first = batch
            first_graph, first_params = graph, params

    assert first is not None
    curves = {
        name: aggregate_trajectories(densities[name])
        for name in names
        if name not in failures and densities[name]
    }
    result = ComparisonResult(
        graph=first_graph,
        params=first_params,
        runs={run.name: run for run in first.successful},
        curves=curves,
        failures=[(name, failures[name]) for name in names if name in failures],
        generator_seeds=generator_seeds,
    )
    if with_metrics:
        result.metrics = build_metrics_report(curves, first_params.grid)
    return result


def _seeds(cfg: ExperimentConfig, generator_seeds: Sequence[int]) -> dict[str, int | list[int]]:
    seeds: dict[str, int | list[int]] = {"seed": cfg.seed, "dra_seed": cfg.baselines.seed}
    if generator_seeds:
        seeds["generator_seeds"] = list(generator_seeds)
    return seeds


def _write_solution(solution: FbsSolution, out_dir: Path, digits: int) -> list[Path]:
    return [
        write_csv(out_dir / "control_optimal.csv", *control_table(solution.control), digits=digits),
        write_csv(out_dir / "adjoint_optimal.csv", *adjoint_table(solution.adjoint), digits=digits),
        write_csv(out_dir / "fbs_report.csv", *fbs_table(solution.report), digits=digits),
    ]


def write_comparison(
    result: ComparisonResult, cfg: ExperimentConfig, out_dir: Path, *, digits: int
) -> list[Path]:
    """write curves, per-strategy trajectories, metrics, the optimal control and the manifest."""
    files: list[Path] = []
    grid = result.params.grid
    names = list(result.curves)
    header = ["t", *names]
    rows = [[float(t), *(float(result.curves[n][k]) for n in names)] for k, t in enumerate(grid)]
    files.append(write_csv(out_dir / "curves.csv", header, rows, digits=digits))

    for name, run in result.runs.items():
        if name not in result.curves:
            continue
        path = out_dir / f"trajectory_{file_stem(name)}.csv"
        files.append(write_csv(path, *trajectory_table(run.states), digits=digits))

    if result.metrics is not None:
        files.append(write_csv(out_dir / "metrics.csv", *metrics_table(result.metrics), digits=digits))

    if result.solution is not None:
        files += _write_solution(result.solution, out_dir, digits)

    files.append(
        write_manifest(
            out_dir,
            config_hash=cfg.config_hash(),
            seeds=_seeds(cfg, result.generator_seeds),
            files=files,
        )
    )
    return files


@dataclass
class OptimizeResult:
    graph: Graph
    params: SirParams
    solution: FbsSolution


def run_optimize(cfg: ExperimentConfig) -> OptimizeResult:
    """forward-backward sweep alone, on replication 0."""
    g = cfg.network.load(0)
    params = cfg.params.resolve(g)
    initial = cfg.initial.build(g.node_count, cfg.seed, 0)
    return OptimizeResult(g, params, fbs_solve(g, params, initial, cfg.fbs))


def write_optimize(
    result: OptimizeResult, cfg: ExperimentConfig, out_dir: Path, *, digits: int
) -> list[Path]:
    files = [
        write_csv(
            out_dir / "trajectory_optimal.csv",
            *trajectory_table(result.solution.states),
            digits=digits,
        ),
        *_write_solution(result.solution, out_dir, digits),
    ]
    seeds = _seeds(cfg, [cfg.network.generator.seed] if cfg.network.generator else [])
    files.append(write_manifest(out_dir, config_hash=cfg.config_hash(), seeds=seeds, files=files))
    return files


@dataclass
class CorrelationResult:
    graph: Graph
    strategy: str
    run: StrategyRun
    series: CorrelationSeries
    classes: DegreeClassSeries
    early: dict[str, float | None]
    late: dict[str, float | None]


def run_correlation(cfg: ExperimentConfig) -> CorrelationResult:
    """r(t) between one strategy's weights and each centrality, plus degree-class means.

    uses the optimal strategy when it is configured, else the first one listed.
    """
    g = cfg.network.load(0)
    params = cfg.params.resolve(g)
    initial = cfg.initial.build(g.node_count, cfg.seed, 0)
    specs = cfg.strategy_specs()
    spec = next((s for s in specs if s.kind is StrategyKind.OPTIMAL), specs[0])
    if spec.kind is not StrategyKind.OPTIMAL:
        logger.warning("optimal strategy not configured; correlating %s", spec.name)

    cache: CentralityCache = {}
    vectors = []
    for metric in cfg.analysis.metrics:
        vector = compute_centrality(g, metric, max_len=cfg.baselines.cycle_max_len)
        cache[metric] = vector
        vectors.append(vector)

    run = run_strategy(spec, g, params, initial, cache=cache)
    series = correlation_series(run.control, vectors)
    classes = degree_class_series(run.control, g, cfg.analysis.bins)
    early = {
        m.value: window_mean(series, m, cfg.analysis.early_fraction, "early")
        for m in series.metrics
    }
    late = {
        m.value: window_mean(series, m, cfg.analysis.late_fraction, "late")
        for m in series.metrics
    }
    for metric in series.metrics:
        logger.info(
            "r_%s early=%s late=%s", metric.value, early[metric.value], late[metric.value]
        )
    return CorrelationResult(g, spec.name, run, series, classes, early, late)


def write_correlation(
    result: CorrelationResult, cfg: ExperimentConfig, out_dir: Path, *, digits: int
) -> list[Path]:
    files = [
        write_csv(out_dir / "correlation.csv", *correlation_table(result.series), digits=digits),
        write_csv(out_dir / "degree_classes.csv", *degree_class_table(result.classes), digits=digits),
    ]
    if result.run.solution is not None:
        files += _write_solution(result.run.solution, out_dir, digits)
    seeds = _seeds(cfg, [cfg.network.generator.seed] if cfg.network.generator else [])
    files.append(write_manifest(out_dir, config_hash=cfg.config_hash(), seeds=seeds, files=files))
    return files
