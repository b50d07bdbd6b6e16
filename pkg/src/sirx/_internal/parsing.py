"""argument parsing utilities."""

from __future__ import annotations

import copy
import json
from collections.abc import Mapping
from typing import Any

from sirx._internal.errors import ConfigError
from sirx._internal.types import OverrideValue


def parse_value(value: str) -> OverrideValue:
    """parse one override value: JSON objects/arrays, booleans, null, numbers, else string."""
    # try JSON first for objects/arrays
    if value.startswith(("{", "[")):
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON value {value!r}: {e}") from e

    lowered = value.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    if lowered == "null":
        return None
    if value.lstrip("-").isdigit():
        return int(value)
    try:
        return float(value)
    except ValueError:
        return value


def parse_key_value_args(args: list[str]) -> dict[str, OverrideValue]:
    """parse key=value arguments into a dict.

    supports JSON for complex values (objects/arrays).

    Args:
        args: list of key=value strings

    Returns:
        parsed dictionary

    Raises:
        ConfigError: if an argument has no '=' or holds invalid JSON

    Examples:
        ```python
        >>> parse_key_value_args(["n=500", "p=0.1", "kind=ba"])
        {'n': 500, 'p': 0.1, 'kind': 'ba'}
        >>> parse_key_value_args(['initial.nodes=[0,1]'])
        {'initial.nodes': [0, 1]}
        ```
    """
    result: dict[str, OverrideValue] = {}
    for arg in args:
        if "=" not in arg:
            raise ConfigError(f"invalid argument format: {arg} (use key=value)")
        key, value = arg.split("=", 1)
        if not key:
            raise ConfigError(f"empty key in {arg!r}")
        result[key] = parse_value(value)
    return result


def apply_overrides(
    data: Mapping[str, Any], overrides: Mapping[str, OverrideValue]
) -> dict[str, Any]:
    """return a copy of `data` with dotted keys (e.g. `params.beta0`) replaced.

    intermediate sections are created when missing.

    Raises:
        ConfigError: if a dotted path runs through a non-mapping value
    """
    result = copy.deepcopy(dict(data))
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        node = result
        for depth, part in enumerate(parts[:-1]):
            child = node.setdefault(part, {})
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                prefix = ".".join(parts[: depth + 1])
                raise ConfigError(f"cannot set {dotted}: {prefix} is not a section")
            node = child
        node[parts[-1]] = value
    return result
