"""Loading and composition of experiment configuration trees.

A configuration file is a YAML-subset document: nested mappings with string
keys, lists, and plain scalars. Anchors, aliases, and implicit timestamps are
rejected so that every tree survives a snapshot/reload round trip unchanged.

A mapping-rooted file may carry a reserved top-level ``include`` list whose
entries compose other files into the tree before the file's own keys apply:

* ``{group: name.yaml}`` loads ``<search_root>/<group>/name.yaml`` and nests
  the result under the ``group`` key.
* ``"name.yaml"`` loads a sibling file (relative to the including file) and
  merges it at the top level.

Later includes override earlier ones, and the including file's own keys win
last; merging is leaf-level, so a later mapping never deletes sibling keys.
"""

from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigError

INCLUDE_KEY = "include"
TARGET_KEY = "_target_"

ConfigNode = dict[str, Any]


class _SubsetLoader(yaml.SafeLoader):
    """SafeLoader restricted to the supported YAML subset."""

    def compose_node(self, parent, index):
        if self.check_event(yaml.events.AliasEvent):
            mark = self.peek_event().start_mark
            raise ConfigError("aliases are not supported", line=mark.line + 1)
        event = self.peek_event()
        if getattr(event, "anchor", None) is not None:
            raise ConfigError("anchors are not supported", line=event.start_mark.line + 1)
        return super().compose_node(parent, index)

    def construct_mapping(self, node, deep=False):
        seen = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            if not isinstance(key, str):
                raise ConfigError(
                    f"mapping keys must be strings, got {key!r}",
                    line=key_node.start_mark.line + 1,
                )
            if key in seen:
                raise ConfigError(
                    f"duplicate key {key!r}", line=key_node.start_mark.line + 1
                )
            seen.add(key)
        return super().construct_mapping(node, deep=deep)


# Dates must stay plain strings, otherwise snapshots would not round-trip.
_SubsetLoader.yaml_implicit_resolvers = {
    prefix: [(tag, regexp) for tag, regexp in pairs if tag != "tag:yaml.org,2002:timestamp"]
    for prefix, pairs in yaml.SafeLoader.yaml_implicit_resolvers.items()
}


def parse_config_text(text: str, *, file: str | None = None) -> Any:
    """Parse one document of subset YAML, reporting file and line on failure."""
    try:
        return yaml.load(text, Loader=_SubsetLoader)
    except ConfigError as exc:
        raise ConfigError(exc.raw_message, file=file, line=exc.line) from None
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(exc.problem or "parse error", file=file, line=line) from None
    except yaml.YAMLError as exc:
        raise ConfigError(str(exc), file=file) from None


def merge_trees(base: ConfigNode, update: ConfigNode) -> ConfigNode:
    """Merge ``update`` over ``base`` at leaf granularity, returning a new tree.

    Mappings merge recursively; any other value (scalar or list) replaces the
    previous one wholesale.
    """
    merged = dict(base)
    for key, value in update.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = merge_trees(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config_tree(root_file: str | Path, search_root: str | Path) -> ConfigNode:
    """Load ``root_file`` and compose its includes into one configuration tree.

    ``root_file`` may be absolute or relative to ``search_root``. Include
    composition is depth-first with last-writer-wins precedence; cycles are
    detected across the whole include chain.
    """
    search_root = Path(search_root)
    root = Path(root_file)
    if not root.is_absolute():
        root = search_root / root
    return _load_file(root, search_root, stack=[])


def _load_file(path: Path, search_root: Path, stack: list[Path]) -> Any:
    resolved = path.resolve()
    if resolved in stack:
        chain = " -> ".join(str(p) for p in stack + [resolved])
        raise ConfigError(f"include cycle: {chain}")
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    tree = parse_config_text(path.read_text(encoding="utf-8"), file=str(path))
    if not isinstance(tree, dict):
        # List- or scalar-rooted files are legal as include targets
        # (e.g. a callback list); they cannot carry includes themselves.
        return tree
    includes = tree.pop(INCLUDE_KEY, [])
    if not isinstance(includes, list):
        raise ConfigError(f"'{INCLUDE_KEY}' must be a list", file=str(path))

    composed: ConfigNode = {}
    for entry in includes:
        subtree = _load_include(entry, path, search_root, stack + [resolved])
        composed = merge_trees(composed, subtree)
    return merge_trees(composed, tree)


def _load_include(entry: Any, including: Path, search_root: Path, stack: list[Path]) -> ConfigNode:
    if isinstance(entry, str):
        loaded = _load_file(including.parent / entry, search_root, stack)
        if not isinstance(loaded, dict):
            raise ConfigError(
                f"top-level include {entry!r} must contain a mapping", file=str(including)
            )
        return loaded
    if isinstance(entry, dict) and len(entry) == 1:
        (group, name), = entry.items()
        if not isinstance(name, str):
            raise ConfigError(f"include entry {entry!r} must name a file", file=str(including))
        loaded = _load_file(search_root / group / name, search_root, stack)
        return {group: loaded}
    raise ConfigError(
        f"include entries must be 'file.yaml' or {{group: file.yaml}}, got {entry!r}",
        file=str(including),
    )


def get_path(tree: ConfigNode, path: str) -> Any:
    """Return the value at a dotted key path, raising ConfigError if absent."""
    node: Any = tree
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"no such config path: {path!r}")
        node = node[part]
    return node
