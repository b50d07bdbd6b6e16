"""type aliases for sirx."""

from __future__ import annotations

from typing import Any

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
BoolArray = npt.NDArray[np.bool_]

Edge = tuple[int, int]

# values accepted by `--set key=value` overrides and generator arguments
OverrideValue = str | int | float | bool | None | dict[str, Any] | list[Any]
