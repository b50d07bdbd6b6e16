"""display utilities for rich output."""

from __future__ import annotations

import csv
import json
import sys
from collections.abc import Sequence
from pathlib import Path

import yaml
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from sirx._internal.analysis import MetricsReport
from sirx._internal.centrality import CentralityVector
from sirx._internal.control import FbsReport
from sirx._internal.graph import Graph
from sirx._internal.output import (
    Cell,
    OutputFormat,
    centrality_table,
    format_float,
    metrics_table,
    stats_table,
)
from sirx._internal.stats import NetworkStats

console = Console()

# significant digits shown in terminal tables
_TABLE_DIGITS = 6


def _text(value: Cell, digits: int) -> str:
    if isinstance(value, float) or value is None:
        return format_float(value, digits)
    return str(value)


def _emit_structured(
    header: Sequence[str], rows: Sequence[Sequence[Cell]], output_format: OutputFormat, digits: int
) -> None:
    """print rows as csv, json or yaml on stdout."""
    if output_format == OutputFormat.CSV:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_text(v, digits) for v in row])
        return

    records = [dict(zip(header, row, strict=True)) for row in rows]
    if output_format == OutputFormat.JSON:
        print(json.dumps(records, indent=2))
    else:
        print(yaml.dump(records, default_flow_style=False, sort_keys=False))


def display_stats(
    stats: NetworkStats,
    *,
    title: str = "network",
    output_format: OutputFormat = OutputFormat.TABLE,
    digits: int = 10,
) -> None:
    """display the seven topology statistics.

    Args:
        stats: computed statistics
        title: panel title (usually the network source)
        output_format: output format enum
        digits: significant digits for csv output
    """
    header, rows = stats_table(stats)
    if output_format != OutputFormat.TABLE:
        _emit_structured(header, rows, output_format, digits)
        return

    table = Table(show_header=False, box=None)
    table.add_column("key", style="cyan")
    table.add_column("value", style="white")
    for key, value in zip(header, rows[0], strict=True):
        table.add_row(key, _text(value, _TABLE_DIGITS))
    console.print(Panel(table, title=f"[bold]{title}[/bold]", border_style="dim"))


def display_centrality(
    g: Graph,
    vectors: Sequence[CentralityVector],
    *,
    output_format: OutputFormat = OutputFormat.TABLE,
    digits: int = 10,
    limit: int | None = None,
) -> None:
    """display per-node centralities; the table view can be truncated to `limit` rows."""
    header, rows = centrality_table(g, vectors)
    if output_format != OutputFormat.TABLE:
        _emit_structured(header, rows, output_format, digits)
        return

    table = Table(
        title=f"centrality ({g.node_count} nodes)",
        show_header=True,
        header_style="bold cyan",
        show_lines=False,
    )
    table.add_column("node", style="dim", no_wrap=True)
    table.add_column("label", style="white", no_wrap=True)
    for name in header[2:]:
        table.add_column(name, style="white", justify="right")
    shown = rows if limit is None else rows[:limit]
    for row in shown:
        table.add_row(*(_text(v, _TABLE_DIGITS) for v in row))
    console.print(table)
    if limit is not None and len(rows) > limit:
        console.print(f"[dim]… {len(rows) - limit} more nodes (use -o csv for all)[/dim]")


def display_metrics(report: MetricsReport) -> None:
    """peak/area table laid out like a comparison table, efficiency rows last."""
    header, rows = metrics_table(report)
    table = Table(title="strategy comparison", show_header=True, header_style="bold cyan")
    for name in header:
        table.add_column(name, justify="left" if name == "strategy" else "right")
    best = {
        report.peak_efficiency.best if report.peak_efficiency else None,
        report.area_efficiency.best if report.area_efficiency else None,
    }
    for index, row in enumerate(rows):
        cells = [_text(v, _TABLE_DIGITS) for v in row]
        style = "green" if index < len(report.rows) and row[0] in best else None
        table.add_row(*cells, style=style, end_section=index == len(report.rows) - 1)
    console.print(table)


def display_fbs_report(report: FbsReport) -> None:
    status = "[green]converged[/green]" if report.converged else "[yellow]not converged[/yellow]"
    console.print(
        f"fbs {status} after {report.iterations} iterations, "
        f"J = {format_float(report.objective, _TABLE_DIGITS)}"
    )


def display_success(operation: str, out_dir: Path, files: Sequence[Path]) -> None:
    """display a success message listing written files.

    Args:
        operation: command that ran
        out_dir: output directory
        files: written paths
    """
    content = f"[green]✓[/green] {operation}\n\n[dim]output:[/dim] {out_dir}"
    for path in files:
        content += f"\n  {path.name}"
    console.print(Panel(content, border_style="green"))
