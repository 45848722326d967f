"""Component registry and registry-driven instantiation.

Nodes carrying a ``_target_`` key name a constructor by dotted path; the
remaining keys become constructor arguments. Lookup goes through an explicit
registry rather than runtime imports, so experiments can only reach
components that were deliberately registered (and tests can use fakes).
"""

from typing import Any, Callable

from ..errors import ConfigError
from .loader import TARGET_KEY, ConfigNode


class Registry:
    """Mapping from dotted target paths to constructors."""

    def __init__(self):
        self._constructors: dict[str, Callable[..., Any]] = {}

    def register(self, path: str, constructor: Callable[..., Any]) -> None:
        if path in self._constructors:
            raise ConfigError(f"target {path!r} already registered")
        self._constructors[path] = constructor

    def get(self, path: str) -> Callable[..., Any]:
        try:
            return self._constructors[path]
        except KeyError:
            raise ConfigError(f"unknown target path {path!r}") from None

    def __contains__(self, path: str) -> bool:
        return path in self._constructors

    def paths(self) -> list[str]:
        return sorted(self._constructors)


def instantiate(node: ConfigNode, registry: Registry, *, path: str = "") -> Any:
    """Construct the component a ``_target_`` node describes.

    Nested ``_target_`` nodes are instantiated depth-first; plain mappings
    and lists pass through as argument values. Constructor failures are
    re-raised as ConfigError with the config path attached.
    """
    if not isinstance(node, dict) or TARGET_KEY not in node:
        raise ConfigError(f"node at {path or '<root>'!r} has no {TARGET_KEY}")
    target = node[TARGET_KEY]
    constructor = registry.get(target)
    kwargs = {
        key: _build_argument(value, registry, f"{path}.{key}" if path else key)
        for key, value in node.items()
        if key != TARGET_KEY
    }
    try:
        return constructor(**kwargs)
    except ConfigError:
        raise
    except Exception as exc:
        where = path or "<root>"
        raise ConfigError(f"cannot construct {target!r} at {where!r}: {exc}") from exc


def _build_argument(value: Any, registry: Registry, path: str) -> Any:
    if isinstance(value, dict):
        if TARGET_KEY in value:
            return instantiate(value, registry, path=path)
        return {k: _build_argument(v, registry, f"{path}.{k}") for k, v in value.items()}
    if isinstance(value, list):
        return [_build_argument(v, registry, f"{path}[{i}]") for i, v in enumerate(value)]
    return value
