"""Command-line override directives: ``path=value`` and ``+path=value``."""

import copy
from dataclasses import dataclass
from enum import Enum
from typing import Any

from ..errors import ConfigError
from .loader import ConfigNode


class OverrideMode(Enum):
    SET_EXISTING = "set"
    ADD_NEW = "add"


@dataclass(frozen=True)
class OverrideDirective:
    path: str
    value: Any
    mode: OverrideMode

    @property
    def token(self) -> str:
        prefix = "+" if self.mode is OverrideMode.ADD_NEW else ""
        return f"{prefix}{self.path}={self.value}"


def parse_value(text: str) -> Any:
    """Parse a scalar token as int, then float, then bool, then string."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text.lower() == "true":
        return True
    if text.lower() == "false":
        return False
    return text


def parse_override(token: str) -> OverrideDirective:
    """Parse one ``[+]path=value`` token into a directive."""
    if "=" not in token:
        raise ConfigError(f"malformed override {token!r}: expected path=value")
    raw_path, raw_value = token.split("=", 1)
    mode = OverrideMode.SET_EXISTING
    if raw_path.startswith("+"):
        mode = OverrideMode.ADD_NEW
        raw_path = raw_path[1:]
    if not raw_path or any(not part for part in raw_path.split(".")):
        raise ConfigError(f"malformed override {token!r}: empty key path")
    return OverrideDirective(path=raw_path, value=parse_value(raw_value), mode=mode)


def apply_overrides(tree: ConfigNode, directives: list[OverrideDirective]) -> ConfigNode:
    """Apply directives in order, returning a new tree.

    ``set-existing`` requires the full path to be present; ``add-new``
    requires the final key to be absent and creates intermediate mappings.
    """
    result = copy.deepcopy(tree)
    for directive in directives:
        parts = directive.path.split(".")
        node = result
        for part in parts[:-1]:
            if part not in node:
                if directive.mode is OverrideMode.SET_EXISTING:
                    raise ConfigError(
                        f"override {directive.token!r}: path {directive.path!r} does not exist"
                    )
                node[part] = {}
            node = node[part]
            if not isinstance(node, dict):
                raise ConfigError(
                    f"override {directive.token!r}: {part!r} is not a mapping"
                )
        leaf = parts[-1]
        if directive.mode is OverrideMode.SET_EXISTING and leaf not in node:
            raise ConfigError(
                f"override {directive.token!r}: path {directive.path!r} does not exist"
            )
        if directive.mode is OverrideMode.ADD_NEW and leaf in node:
            raise ConfigError(
                f"override {directive.token!r}: path {directive.path!r} already exists"
            )
        node[leaf] = directive.value
    return result
