"""command-line interface for network rumor-intervention experiments."""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path
from typing import NoReturn

from sirx import __version__
from sirx._internal.baselines import StrategyKind
from sirx._internal.batch import display_batch_result
from sirx._internal.centrality import DEFAULT_MAX_LEN, CentralityMetric, compute_centrality
from sirx._internal.config import ExperimentConfig, load_experiment_config, settings
from sirx._internal.display import (
    console,
    display_centrality,
    display_fbs_report,
    display_metrics,
    display_stats,
    display_success,
)
from sirx._internal.errors import (
    ConfigError,
    ConvergenceError,
    GraphError,
    InvariantError,
    ParameterError,
    SolverError,
)
from sirx._internal.experiment import (
    load_network,
    resolve_output_dir,
    run_comparison,
    run_correlation,
    run_optimize,
    write_comparison,
    write_correlation,
    write_optimize,
)
from sirx._internal.logging import configure_logging, stderr_console
from sirx._internal.output import OutputFormat, is_tty
from sirx._internal.parsing import parse_key_value_args
from sirx._internal.stats import network_stats

EXIT_SOLVER = 1
EXIT_INPUT = 2

OUTPUT_CHOICES = [f.value for f in OutputFormat]


def cmd_stats(source: list[str], output_format: OutputFormat) -> None:
    """print the seven topology statistics of a network."""
    g, name = load_network(source)
    display_stats(
        network_stats(g), title=name, output_format=output_format, digits=settings.float_digits
    )


def cmd_centrality(
    source: list[str],
    metrics: list[CentralityMetric],
    *,
    max_len: int,
    output_format: OutputFormat,
    limit: int | None,
) -> None:
    """print per-node centralities."""
    g, _ = load_network(source)
    vectors = [compute_centrality(g, m, max_len=max_len) for m in metrics]
    display_centrality(
        g, vectors, output_format=output_format, digits=settings.float_digits, limit=limit
    )


async def cmd_compare(
    cfg: ExperimentConfig, *, concurrency: int | None = None, with_metrics: bool = True
) -> None:
    """run the configured strategies and write curves, trajectories and metrics."""
    concurrency = concurrency or cfg.concurrency or settings.concurrency
    result = await run_comparison(
        cfg, concurrency=concurrency, show_progress=is_tty(), with_metrics=with_metrics
    )
    operation = "compared" if with_metrics else "simulated"
    display_batch_result(result.failures, len(cfg.strategies), operation)

    if result.metrics is not None:
        display_metrics(result.metrics)
        if result.metrics.peak_efficiency is None:
            stderr_console.print(
                "[yellow]warning:[/yellow] efficiency needs at least 2 successful strategies (fewer than 2)"
            )
    if result.solution is not None:
        display_fbs_report(result.solution.report)

    out_dir = resolve_output_dir(cfg, settings.output_dir)
    files = write_comparison(result, cfg, out_dir, digits=settings.float_digits)
    display_success(operation, out_dir, files)


async def cmd_optimize(cfg: ExperimentConfig) -> None:
    """solve the optimal control problem and write control, trajectory, adjoint and report."""
    result = await asyncio.to_thread(run_optimize, cfg)
    display_fbs_report(result.solution.report)
    out_dir = resolve_output_dir(cfg, settings.output_dir)
    files = write_optimize(result, cfg, out_dir, digits=settings.float_digits)
    display_success("optimized", out_dir, files)


async def cmd_correlate(cfg: ExperimentConfig) -> None:
    """write weight/centrality correlation series and degree-class means."""
    result = await asyncio.to_thread(run_correlation, cfg)
    for metric, early in result.early.items():
        late = result.late[metric]
        console.print(
            f"r_{metric}: early {'undefined' if early is None else f'{early:.4f}'}, "
            f"late {'undefined' if late is None else f'{late:.4f}'}"
        )
    out_dir = resolve_output_dir(cfg, settings.output_dir)
    files = write_correlation(result, cfg, out_dir, digits=settings.float_digits)
    display_success(f"correlated ({result.strategy})", out_dir, files)


def _load_config(args: argparse.Namespace, *, default_strategies: list[str] | None = None) -> ExperimentConfig:
    cfg = load_experiment_config(
        args.config,
        parse_key_value_args(args.set or []),
        seed=args.seed,
        strategies=args.strategy,
        output_dir=args.out,
    )
    if default_strategies and not args.strategy and "strategies" not in cfg.model_fields_set:
        cfg = cfg.model_copy(update={"strategies": [StrategyKind(s) for s in default_strategies]})
    return cfg


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", "-c", required=True, type=Path, help="experiment YAML file")
    parser.add_argument("--out", type=Path, help="output directory (overrides config)")
    parser.add_argument(
        "--seed", type=int, help="run seed, also the network generator seed (overrides config)"
    )
    parser.add_argument(
        "--concurrency", type=int, help="strategies run at once (overrides config and SIRX_CONCURRENCY)"
    )
    parser.add_argument(
        "--strategy",
        action="append",
        metavar="NAME",
        help="strategy to run, repeatable (e.g. optimal, un, dc+, bc-, dra, unc)",
    )
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config value by dotted key, repeatable (e.g. params.w_total=5)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sirx",
        description="optimal node-level rumor intervention on networks",
        epilog="""
examples:
  # statistics of the shipped karate network
  sirx stats karate

  # centralities of a generated BA network, as csv
  sirx centrality ba n=500 m_attach=3 seed=1 -o csv > centrality.csv

  # compare every strategy described in a config file
  sirx compare --config configs/ba500.yaml --out results/ba500

  # only the optimal and uniform strategies, with a larger budget
  sirx compare -c configs/ba500.yaml --strategy optimal --strategy un --set params.w_total=25

note: network sources are a file path, a dataset name (karate), or a
      generator kind followed by key=value parameters (ba, ws, er)
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    # version flag
    parser.add_argument(
        "-v",
        "--version",
        action="version",
        version=f"sirx {__version__}",
    )
    parser.add_argument(
        "--log-level",
        help=f"logging level (default: {settings.log_level}, env SIRX_LOG_LEVEL)",
    )

    subparsers = parser.add_subparsers(dest="command", help="command")

    stats_parser = subparsers.add_parser("stats", help="network statistics")
    stats_parser.add_argument("source", nargs="+", help="path | dataset | kind key=value ...")
    stats_parser.add_argument(
        "-o", "--output", choices=OUTPUT_CHOICES, help="output format (default: table)"
    )

    centrality_parser = subparsers.add_parser("centrality", help="per-node centralities")
    centrality_parser.add_argument("source", nargs="+", help="path | dataset | kind key=value ...")
    centrality_parser.add_argument(
        "-m",
        "--metric",
        action="append",
        metavar="NAME",
        help="dc, bc, cc, cn or cr; repeatable (default: all)",
    )
    centrality_parser.add_argument(
        "--max-len", type=int, default=DEFAULT_MAX_LEN, help="longest cycle for cn/cr (default: 6)"
    )
    centrality_parser.add_argument("--limit", type=int, help="rows shown in table output")
    centrality_parser.add_argument(
        "-o", "--output", choices=OUTPUT_CHOICES, help="output format (default: table)"
    )

    for name, help_text in (
        ("simulate", "run strategies without the efficiency analysis (default: unc)"),
        ("optimize", "solve the optimal control problem"),
        ("compare", "compare strategies and compute peak/area metrics"),
        ("correlate", "correlate optimal weights with centralities over time"),
    ):
        _add_run_flags(subparsers.add_parser(name, help=help_text))

    return parser


async def async_main(argv: list[str] | None = None) -> int:
    """main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    configure_logging(args.log_level or settings.log_level)

    if not args.command:
        parser.print_help()
        return 1

    try:
        if args.command == "stats":
            fmt = OutputFormat(args.output) if args.output else OutputFormat.TABLE
            cmd_stats(args.source, fmt)

        elif args.command == "centrality":
            fmt = OutputFormat(args.output) if args.output else OutputFormat.TABLE
            try:
                metrics = [CentralityMetric(m) for m in args.metric] if args.metric else list(CentralityMetric)
            except ValueError as e:
                raise ConfigError(str(e)) from e
            cmd_centrality(args.source, metrics, max_len=args.max_len, output_format=fmt, limit=args.limit)

        elif args.command == "simulate":
            await cmd_compare(
                _load_config(args, default_strategies=["unc"]),
                concurrency=args.concurrency,
                with_metrics=False,
            )

        elif args.command == "optimize":
            await cmd_optimize(_load_config(args))

        elif args.command == "compare":
            await cmd_compare(_load_config(args), concurrency=args.concurrency)

        elif args.command == "correlate":
            await cmd_correlate(_load_config(args))

        return 0

    except (SolverError, ConvergenceError, InvariantError) as e:
        stderr_console.print(f"[red]error:[/red] {e}", markup=True, highlight=False)
        if settings.debug:
            raise
        return EXIT_SOLVER
    except (ConfigError, GraphError, ParameterError, OSError) as e:
        stderr_console.print(f"[red]error:[/red] {e}", markup=True, highlight=False)
        if settings.debug:
            raise
        return EXIT_INPUT


def main() -> NoReturn:
    """synchronous entry point."""
    sys.exit(asyncio.run(async_main()))
