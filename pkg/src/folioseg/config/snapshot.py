"""Canonical serialization of resolved configurations.

The snapshot is the reproducibility record: a run directory's
``config.yaml`` can be fed back to the runner and yields the same tree.
Canonical form means sorted keys and explicit scalar typing, so equal trees
always produce byte-identical files.
"""

from pathlib import Path

import yaml

from ..errors import ConfigError
from .interpolate import unresolved_tokens
from .loader import ConfigNode, parse_config_text

SNAPSHOT_NAME = "config.yaml"


def dump_canonical(tree: ConfigNode) -> str:
    """Serialize a tree to canonical YAML text."""
    return yaml.safe_dump(
        tree,
        sort_keys=True,
        default_flow_style=False,
        allow_unicode=True,
        width=100000,
    )


def snapshot(resolved: ConfigNode, run_dir: str | Path) -> Path:
    """Write the resolved tree to ``<run_dir>/config.yaml`` and return the path."""
    leftovers = unresolved_tokens(resolved)
    if leftovers:
        raise ConfigError(f"cannot snapshot: unresolved interpolations at {leftovers}")
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ConfigError(f"run directory does not exist: {run_dir}")
    path = run_dir / SNAPSHOT_NAME
    path.write_text(dump_canonical(resolved), encoding="utf-8")
    return path


def load_snapshot(path: str | Path) -> ConfigNode:
    """Read a snapshot back into a tree equal to the one that was written."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"snapshot not found: {path}")
    tree = parse_config_text(path.read_text(encoding="utf-8"), file=str(path))
    if not isinstance(tree, dict):
        raise ConfigError(f"snapshot root must be a mapping: {path}")
    return tree
