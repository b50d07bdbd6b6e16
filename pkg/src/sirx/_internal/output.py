"""output formatting and CSV/manifest writers."""

from __future__ import annotations

import csv
import json
import math
import platform
import sys
from collections.abc import Iterable, Sequence
from enum import Enum
from pathlib import Path

import numpy as np
import scipy

from sirx._internal.analysis import CorrelationSeries, DegreeClassSeries, MetricsReport
from sirx._internal.centrality import CentralityVector
from sirx._internal.control import AdjointTrajectory, FbsReport
from sirx._internal.dynamics import ControlTrajectory, StateTrajectory
from sirx._internal.graph import Graph
from sirx._internal.logging import get_logger
from sirx._internal.stats import NetworkStats

logger = get_logger(__name__)

DEFAULT_DIGITS = 10

Cell = str | int | float | None


class OutputFormat(str, Enum):
    """stdout format options following kubectl/gh conventions."""

    TABLE = "table"  # rich table (default for TTY)
    CSV = "csv"
    JSON = "json"
    YAML = "yaml"


def is_tty() -> bool:
    """check if stdout is a terminal."""
    return sys.stdout.isatty()


def format_float(value: float | None, digits: int = DEFAULT_DIGITS) -> str:
    """render a float with `digits` significant digits; None and NaN become 'nan'."""
    if value is None or math.isnan(value):
        return "nan"
    return f"{value:.{digits}g}"


def _cell(value: Cell, digits: int) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)) or value is None:
        return format_float(None if value is None else float(value), digits)
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Cell]],
    *,
    digits: int = DEFAULT_DIGITS,
) -> Path:
    """write rows under a header; floats use `format_float`."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v, digits) for v in row])
    logger.info("wrote %s", path)
    return path


def stats_table(stats: NetworkStats) -> tuple[list[str], list[list[Cell]]]:
    values = stats.as_dict()
    return list(values), [list(values.values())]


def centrality_table(
    g: Graph, vectors: Sequence[CentralityVector]
) -> tuple[list[str], list[list[Cell]]]:
    header = ["node", "label", *(v.metric.value for v in vectors)]
    rows: list[list[Cell]] = [
        [node, g.label_of(node), *(float(v.values[node]) for v in vectors)]
        for node in range(g.node_count)
    ]
    return header, rows


def trajectory_table(
    traj: StateTrajectory, *, per_node: bool = False
) -> tuple[list[str], list[list[Cell]]]:
    """t, mean_S, mean_I, mean_R, then optionally I_0..I_{N-1}."""
    header = ["t", "mean_S", "mean_I", "mean_R"]
    if per_node:
        header += [f"I_{i}" for i in range(traj.node_count)]
    s, i, r = traj.mean_susceptible(), traj.mean_infected(), traj.mean_recovered()
    rows: list[list[Cell]] = []
    for k, t in enumerate(traj.grid):
        row: list[Cell] = [float(t), float(s[k]), float(i[k]), float(r[k])]
        if per_node:
            row += [float(x) for x in traj.i[k]]
        rows.append(row)
    return header, rows


def control_table(control: ControlTrajectory) -> tuple[list[str], list[list[Cell]]]:
    header = ["t", *(f"w_{i}" for i in range(control.node_count))]
    rows: list[list[Cell]] = [
        [float(t), *(float(x) for x in control.weights[k])] for k, t in enumerate(control.grid)
    ]
    return header, rows


def fbs_table(report: FbsReport) -> tuple[list[str], list[list[Cell]]]:
    header = ["iteration", "J", "rel_change", "lambda4_max"]
    rows: list[list[Cell]] = [
        [h.iteration, h.objective, h.rel_change, h.lambda4_max] for h in report.history
    ]
    return header, rows


def adjoint_table(adjoint: AdjointTrajectory) -> tuple[list[str], list[list[Cell]]]:
    """node-mean costates and λ4 per grid time."""
    header = ["t", "mean_lambda1", "mean_lambda2", "mean_lambda3", "lambda4"]
    l1, l2, l3 = (adjoint.lambda1.mean(axis=1), adjoint.lambda2.mean(axis=1), adjoint.lambda3.mean(axis=1))
    rows: list[list[Cell]] = [
        [float(t), float(l1[k]), float(l2[k]), float(l3[k]), float(adjoint.lambda4[k])]
        for k, t in enumerate(adjoint.grid)
    ]
    return header, rows


def metrics_table(report: MetricsReport) -> tuple[list[str], list[list[Cell]]]:
    """one row per strategy, then Δ, P and P_alt rows for both metrics."""
    header = ["strategy", "peak", "area"]
    rows: list[list[Cell]] = [[r.name, r.peak, r.area] for r in report.rows]
    peak_eff, area_eff = report.peak_efficiency, report.area_efficiency
    if peak_eff is not None and area_eff is not None:
        rows.append(["delta", peak_eff.delta, area_eff.delta])
        rows.append(["P", peak_eff.p, area_eff.p])
        rows.append(["P_alt", peak_eff.p_alt, area_eff.p_alt])
        rows.append(["best", peak_eff.best, area_eff.best])
        rows.append(["second", peak_eff.second, area_eff.second])
    return header, rows


def correlation_table(series: CorrelationSeries) -> tuple[list[str], list[list[Cell]]]:
    """t, then r and a defined flag per metric."""
    header = ["t"]
    for metric in series.metrics:
        header += [f"r_{metric.value}", f"defined_{metric.value}"]
    defined = series.defined
    rows: list[list[Cell]] = []
    for k, t in enumerate(series.grid):
        row: list[Cell] = [float(t)]
        for m in range(len(series.metrics)):
            row += [float(series.values[k, m]), int(defined[k, m])]
        rows.append(row)
    return header, rows


def degree_class_table(series: DegreeClassSeries) -> tuple[list[str], list[list[Cell]]]:
    bins = series.counts.size
    header = ["t", *(f"bin_{b}" for b in range(bins))]
    rows: list[list[Cell]] = [
        [float(t), *(float(x) for x in series.means[k])] for k, t in enumerate(series.grid)
    ]
    return header, rows


def package_versions() -> dict[str, str]:
    from sirx import __version__

    return {
        "numpy": np.__version__,
        "python": platform.python_version(),
        "scipy": scipy.__version__,
        "sirx": __version__,
    }


def write_manifest(
    out_dir: Path,
    *,
    config_hash: str,
    seeds: dict[str, int | list[int]],
    files: Sequence[Path],
) -> Path:
    """manifest.json with config hash, seeds, versions and written files (no timestamps)."""
    manifest = {
        "config_sha256": config_hash,
        "files": sorted(p.name for p in files),
        "seeds": seeds,
        "versions": package_versions(),
    }
    path = out_dir / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path
