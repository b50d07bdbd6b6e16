"""infection metrics, suppression efficiency, and weight/centrality correlation analytics."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from sirx._internal.centrality import CentralityMetric, CentralityVector
from sirx._internal.dynamics import ControlTrajectory, StateTrajectory
from sirx._internal.errors import ParameterError
from sirx._internal.graph import Graph
from sirx._internal.logging import get_logger
from sirx._internal.types import FloatArray, IntArray

logger = get_logger(__name__)

# variance below which a correlation is reported as undefined
VARIANCE_FLOOR = 1e-24

Window = Literal["early", "late"]


def pearson(x: Sequence[float] | FloatArray, y: Sequence[float] | FloatArray) -> float | None:
    """product-moment correlation of two equal-length samples.

    Returns:
        r in [-1, 1], or None when either sample has (near) zero variance

    Raises:
        ParameterError: on length mismatch or fewer than two samples
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError(f"pearson needs two 1-D samples of equal length, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise ParameterError("pearson needs at least two samples")
    da = a - a.mean()
    db = b - b.mean()
    saa = float(da @ da)
    sbb = float(db @ db)
    if saa / a.size < VARIANCE_FLOOR or sbb / b.size < VARIANCE_FLOOR:
        return None
    r = float(da @ db) / math.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class CorrelationSeries:
    """r(t_k) between the weights and each metric; NaN marks undefined points."""

    grid: FloatArray
    metrics: tuple[CentralityMetric, ...]
    values: FloatArray

    @property
    def defined(self) -> np.ndarray:
        """boolean mask of points where r is defined."""
        return ~np.isnan(self.values)

    def column(self, metric: CentralityMetric | str) -> FloatArray:
        return self.values[:, self.metrics.index(CentralityMetric(metric))]


def correlation_series(
    control: ControlTrajectory, metrics: Sequence[CentralityVector]
) -> CorrelationSeries:
    """pearson over nodes between w(t_k) and every centrality vector, per grid time."""
    w, grid = control.weights, control.grid
    for vector in metrics:
        if len(vector) != w.shape[1]:
            raise ParameterError(
                f"{vector.metric.value} has {len(vector)} entries for {w.shape[1]} nodes"
            )
    values = np.full((grid.size, len(metrics)), np.nan)
    for k, row in enumerate(w):
        for m, vector in enumerate(metrics):
            r = pearson(row, vector.values)
            if r is not None:
                values[k, m] = r
    return CorrelationSeries(grid, tuple(v.metric for v in metrics), values)


def window_slice(length: int, fraction: float, which: Window) -> slice:
    """index range of the first or last `fraction` of a grid (at least one point)."""
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"window fraction must lie in (0, 1], got {fraction}")
    count = max(1, math.ceil(fraction * length))
    return slice(0, count) if which == "early" else slice(length - count, length)


def window_mean(
    series: CorrelationSeries,
    metric: CentralityMetric | str,
    fraction: float,
    which: Window,
) -> float | None:
    """mean of the defined r-values in the early or late window; None if none is defined."""
    column = series.column(metric)[window_slice(series.grid.size, fraction, which)]
    column = column[~np.isnan(column)]
    if column.size == 0:
        return None
    return float(column.mean())


def series_peak(density: FloatArray) -> float:
    if density.size == 0:
        raise ParameterError("empty infection series")
    return float(density.max())


def series_area(density: FloatArray, grid: FloatArray) -> float:
    if density.shape != grid.shape:
        raise ParameterError("infection series and grid differ in length")
    return float(trapezoid(density, grid))


def peak(traj: StateTrajectory) -> float:
    """maximum node-mean infection over the grid."""
    return series_peak(traj.mean_infected())


def area(traj: StateTrajectory) -> float:
    """trapezoidal integral of the node-mean infection over [0, T]."""
    return series_area(traj.mean_infected(), traj.grid)


class EfficiencyResult(NamedTuple):
    delta: float
    p: float
    p_alt: float | None
    best: str
    second: str


def efficiency(values: Mapping[str, float]) -> EfficiencyResult:
    """gap between the best and second-best strategy (smaller is better).

    Δ = v_(2) − v_(1), P = Δ / v_(2) · 100 and P_alt = Δ / v_(1) · 100. ties
    keep the first name given.

    Raises:
        ParameterError: with fewer than 2 values
    """
    if len(values) < 2:
        raise ParameterError(f"efficiency needs at least 2 strategies, got fewer than 2 ({len(values)})")
    ranked = sorted(values.items(), key=lambda item: item[1])
    (best, v1), (second, v2) = ranked[0], ranked[1]
    delta = v2 - v1
    p = delta / v2 * 100.0 if v2 > 0 else 0.0
    p_alt = delta / v1 * 100.0 if v1 > 0 else None
    return EfficiencyResult(delta, p, p_alt, best, second)


class StrategyMetrics(NamedTuple):
    name: str
    peak: float
    area: float


@dataclass(frozen=True)
class MetricsReport:
    """per-strategy peak and area plus the efficiency of the best strategy.

    the efficiency fields are None when fewer than two strategies succeeded.
    """

    rows: tuple[StrategyMetrics, ...]
    peak_efficiency: EfficiencyResult | None
    area_efficiency: EfficiencyResult | None

    def row(self, name: str) -> StrategyMetrics:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)


def build_metrics_report(curves: Mapping[str, FloatArray], grid: FloatArray) -> MetricsReport:
    """metrics for named infection-density curves, in the given order."""
    rows = tuple(
        StrategyMetrics(name, series_peak(curve), series_area(curve, grid))
        for name, curve in curves.items()
    )
    try:
        peak_eff = efficiency({r.name: r.peak for r in rows})
        area_eff = efficiency({r.name: r.area for r in rows})
    except ParameterError as e:
        logger.warning("efficiency not computed: %s", e)
        peak_eff = area_eff = None
    return MetricsReport(rows, peak_eff, area_eff)


@dataclass(frozen=True)
class DegreeClassSeries:
    """mean weight per normalized-degree bin at every grid time.

    `means` has shape (K+1, bins) and holds NaN for empty bins.
    """

    grid: FloatArray
    edges: FloatArray
    counts: IntArray
    means: FloatArray

    @property
    def bottom_bin(self) -> int:
        """lowest nonempty bin index."""
        return int(np.flatnonzero(self.counts)[0])

    @property
    def top_bin(self) -> int:
        """highest nonempty bin index."""
        return int(np.flatnonzero(self.counts)[-1])


def degree_class_series(control: ControlTrajectory, g: Graph, bins: int) -> DegreeClassSeries:
    """partition nodes into equal-width bins of min-max normalized degree."""
    if bins < 2:
        raise ParameterError(f"bins must be >= 2, got {bins}")
    w, grid = control.weights, control.grid
    if w.shape != (grid.size, g.node_count):
        raise ParameterError(f"weights must have shape {(grid.size, g.node_count)}, got {w.shape}")

    k = g.degree.astype(np.float64)
    spread = float(k.max() - k.min())
    normalized = (k - k.min()) / spread if spread > 0 else np.zeros_like(k)
    index = np.minimum((normalized * bins).astype(np.int64), bins - 1)

    counts = np.bincount(index, minlength=bins).astype(np.int64)
    means = np.full((grid.size, bins), np.nan)
    for b in np.flatnonzero(counts):
        means[:, b] = w[:, index == b].mean(axis=1)
    return DegreeClassSeries(grid, np.linspace(0.0, 1.0, bins + 1), counts, means)


def aggregate_trajectories(trajs: Sequence[StateTrajectory]) -> FloatArray:
    """node-mean infection averaged across replications."""
    if not trajs:
        raise ParameterError("no trajectories to aggregate")
    densities = [t.mean_infected() for t in trajs]
    shape = densities[0].shape
    if any(d.shape != shape for d in densities):
        raise ParameterError("replication curves differ in length")
    return np.mean(np.stack(densities), axis=0)
