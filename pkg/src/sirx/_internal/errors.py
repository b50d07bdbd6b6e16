"""exception hierarchy for sirx.

every error also subclasses the closest builtin so callers can catch
`ValueError` / `ArithmeticError` without importing sirx.
"""

from __future__ import annotations

from typing import Any


class SirxError(Exception):
    """base class for all sirx errors."""


class GraphError(SirxError, ValueError):
    """invalid graph, generator parameters, or undefined statistic."""


class EdgeListParseError(GraphError):
    """edge list could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class ParameterError(SirxError, ValueError):
    """argument outside its admissible range or mismatched grids."""


class ConfigError(SirxError, ValueError):
    """invalid experiment configuration or override."""


class ConvergenceError(SirxError, ArithmeticError):
    """an iterative method hit its iteration cap."""

    def __init__(self, message: str, *, last_iterate: Any, iterations: int) -> None:
        self.last_iterate = last_iterate
        self.iterations = iterations
        super().__init__(f"{message} (after {iterations} iterations)")


class InvariantError(SirxError, ArithmeticError):
    """state left the simplex during integration."""

    def __init__(self, message: str, *, step: int, breach: float) -> None:
        self.step = step
        self.breach = breach
        super().__init__(
            f"{message} at step {step} (breach {breach:.3e}); "
            "try a smaller time step (increase steps)"
        )


class SolverError(SirxError, ArithmeticError):
    """forward-backward sweep produced non-finite values."""

    def __init__(self, message: str, *, iteration: int | None = None) -> None:
        self.iteration = iteration
        prefix = f"iteration {iteration}: " if iteration is not None else ""
        super().__init__(f"{prefix}{message}")
