"""Configuration engine: load, compose, override, interpolate, instantiate, snapshot."""

from .interpolate import resolve_interpolations, unresolved_tokens
from .loader import INCLUDE_KEY, TARGET_KEY, ConfigNode, load_config_tree, merge_trees, get_path
from .overrides import OverrideDirective, OverrideMode, apply_overrides, parse_override
from .registry import Registry, instantiate
from .snapshot import SNAPSHOT_NAME, dump_canonical, load_snapshot, snapshot

__all__ = [
    "INCLUDE_KEY",
    "TARGET_KEY",
    "SNAPSHOT_NAME",
    "ConfigNode",
    "OverrideDirective",
    "OverrideMode",
    "Registry",
    "apply_overrides",
    "dump_canonical",
    "get_path",
    "instantiate",
    "load_config_tree",
    "load_snapshot",
    "merge_trees",
    "parse_override",
    "resolve_interpolations",
    "snapshot",
    "unresolved_tokens",
]
