"""spectral radius by shifted power iteration."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from sirx._internal.errors import ConvergenceError, GraphError
from sirx._internal.graph import Graph
from sirx._internal.types import FloatArray

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


def power_iteration(
    matvec: Callable[[FloatArray], FloatArray],
    n: int,
    *,
    shift: float = 1.0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """largest eigenvalue of a symmetric nonnegative operator.

    iterates on B = M + shift·I from the all-ones vector and stops once the
    eigen-residual ‖Bx − μx‖ drops below `tol`, which bounds the distance of
    the Rayleigh quotient μ to an eigenvalue of B. the shift makes the Perron
    root strictly dominant on bipartite graphs.

    Returns:
        μ − shift

    Raises:
        ConvergenceError: if `max_iter` is reached; carries the last estimate
    """
    if n < 1:
        raise GraphError("power iteration needs at least one node")
    x = np.full(n, 1.0 / np.sqrt(n))
    estimate = 0.0
    for iteration in range(1, max_iter + 1):
        y = matvec(x) + shift * x
        estimate = float(x @ y)
        residual = float(np.linalg.norm(y - estimate * x))
        if residual < tol:
            return estimate - shift
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return estimate - shift
        x = y / norm
    raise ConvergenceError(
        "power iteration did not converge",
        last_iterate=estimate - shift,
        iterations=iteration,
    )


def spectral_radius(
    g: Graph, tol: float = DEFAULT_TOL, *, max_iter: int = DEFAULT_MAX_ITER
) -> float:
    """largest adjacency eigenvalue ρ(A)."""
    adjacency = g.adjacency
    return power_iteration(
        lambda x: adjacency @ x, g.node_count, shift=1.0, tol=tol, max_iter=max_iter
    )


def scaled_spectral_radius(
    g: Graph,
    scale: FloatArray,
    tol: float = DEFAULT_TOL,
    *,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """ρ(diag(scale)·A) for a nonnegative per-node scale.

    diag(d)·A shares its spectrum with the symmetric D^½·A·D^½, which is
    what gets iterated.
    """
    d = np.asarray(scale, dtype=np.float64)
    if d.shape != (g.node_count,):
        raise GraphError(f"scale must have length {g.node_count}, got {d.shape}")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise GraphError("scale must be finite and nonnegative")
    peak = float(d.max())
    if peak == 0.0:
        return 0.0
    root = np.sqrt(d)
    adjacency = g.adjacency
    return power_iteration(
        lambda x: root * (adjacency @ (root * x)),
        g.node_count,
        shift=peak,
        tol=tol,
        max_iter=max_iter,
    )
