"""Run-time interpolation of ``${scope:key}`` tokens.

Providers are live components (in the shipped runner: the datamodule) that
export scalar values under a scope name. Resolution is single-pass: provider
values may not themselves contain interpolation tokens, and ``_target_``
paths are static so tokens inside them are rejected.
"""

import re
from typing import Any, Mapping

from ..errors import ConfigError
from .loader import TARGET_KEY, ConfigNode

_TOKEN = re.compile(r"\$\{([^}]*)\}")

Providers = Mapping[str, Mapping[str, Any]]


def _lookup(body: str, providers: Providers, at: str) -> Any:
    if ":" not in body:
        raise ConfigError(f"malformed interpolation '${{{body}}}' at {at!r}")
    scope, key = body.split(":", 1)
    if scope not in providers:
        raise ConfigError(f"unknown interpolation scope {scope!r} at {at!r}")
    if key not in providers[scope]:
        raise ConfigError(f"unknown key {key!r} in scope {scope!r} at {at!r}")
    value = providers[scope][key]
    if isinstance(value, str) and _TOKEN.search(value):
        raise ConfigError(f"provider value for {scope}:{key} contains an interpolation")
    return value


def _resolve_string(text: str, providers: Providers, at: str) -> Any:
    full = _TOKEN.fullmatch(text)
    if full:
        return _lookup(full.group(1), providers, at)
    return _TOKEN.sub(lambda m: str(_lookup(m.group(1), providers, at)), text)


def _resolve(value: Any, providers: Providers, at: str) -> Any:
    if isinstance(value, dict):
        out = {}
        for key, child in value.items():
            child_at = f"{at}.{key}" if at else key
            if key == TARGET_KEY and isinstance(child, str) and _TOKEN.search(child):
                raise ConfigError(f"interpolation not allowed in {TARGET_KEY} at {at!r}")
            out[key] = _resolve(child, providers, child_at)
        return out
    if isinstance(value, list):
        return [_resolve(item, providers, f"{at}[{i}]") for i, item in enumerate(value)]
    if isinstance(value, str):
        return _resolve_string(value, providers, at)
    return value


def resolve_interpolations(tree: ConfigNode, providers: Providers) -> ConfigNode:
    """Substitute every interpolation token, preserving native value types.

    A token that is the entire string keeps the provider value's type;
    tokens embedded in longer strings are substituted textually.
    """
    return _resolve(tree, providers, at="")


def unresolved_tokens(tree: ConfigNode) -> list[str]:
    """Return the dotted paths of any remaining ``${...}`` tokens."""
    found: list[str] = []

    def walk(value: Any, at: str) -> None:
        if isinstance(value, dict):
            for key, child in value.items():
                walk(child, f"{at}.{key}" if at else key)
        elif isinstance(value, list):
            for i, item in enumerate(value):
                walk(item, f"{at}[{i}]")
        elif isinstance(value, str) and _TOKEN.search(value):
            found.append(at)

    walk(tree, "")
    return found
