"""Weight checkpoints: named-array containers with per-blob checksums.

Format (documented here, version 1): a ZIP archive holding

* ``meta.json``: format version, part name, architecture id, and for every
  array its dtype, shape, and SHA-256 of the raw data bytes;
* one ``<parameter name>.npy`` entry per array (no pickling).

Entry timestamps are fixed, so identical state produces byte-identical
files. A checkpoint loads only into a model whose part architecture matches,
and a checksum mismatch is reported as corruption.
"""

import hashlib
import io
import json
import zipfile
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from .compose import ComposedModel

FORMAT_VERSION = 1
PARTS = ("backbone", "header", "full")
_EPOCH = (1980, 1, 1, 0, 0, 0)


def _part_architecture(model: ComposedModel, part: str) -> str:
    if part == "backbone":
        return model.backbone.spec.architecture
    if part == "header":
        return model.header.spec.architecture
    return model.architecture


def _part_state(model: ComposedModel, part: str) -> dict[str, np.ndarray]:
    state = model.named_state()
    if part == "full":
        return state
    prefix = f"{part}."
    return {name: array for name, array in state.items() if name.startswith(prefix)}


def _sha256(array: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(array).tobytes()).hexdigest()


def save_part(model: ComposedModel, part: str, path: str | Path) -> Path:
    """Write one part's state (parameters and buffers) to ``path``."""
    if part not in PARTS:
        raise CheckpointError(f"unknown model part {part!r}, expected one of {PARTS}")
    path = Path(path)
    state = _part_state(model, part)
    meta = {
        "format_version": FORMAT_VERSION,
        "part": part,
        "architecture": _part_architecture(model, part),
        "arrays": {
            name: {
                "dtype": str(array.dtype),
                "shape": list(array.shape),
                "sha256": _sha256(array),
            }
            for name, array in state.items()
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as archive:
        archive.writestr(
            zipfile.ZipInfo("meta.json", date_time=_EPOCH),
            json.dumps(meta, indent=2, sort_keys=True),
        )
        for name, array in state.items():
            buffer = io.BytesIO()
            np.lib.format.write_array(buffer, np.ascontiguousarray(array), allow_pickle=False)
            archive.writestr(zipfile.ZipInfo(f"{name}.npy", date_time=_EPOCH), buffer.getvalue())
    return path


def load_part(path: str | Path, model: ComposedModel) -> ComposedModel:
    """Restore one part's state into ``model`` in place.

    The checkpoint decides which part it carries; the target model must
    match that part's architecture exactly.
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with zipfile.ZipFile(path) as archive:
            meta = json.loads(archive.read("meta.json"))
            if meta.get("format_version") != FORMAT_VERSION:
                raise CheckpointError(
                    f"{path}: format version {meta.get('format_version')} "
                    f"!= supported {FORMAT_VERSION}"
                )
            part = meta.get("part")
            if part not in PARTS:
                raise CheckpointError(f"{path}: unknown part {part!r}")
            expected_arch = _part_architecture(model, part)
            if meta.get("architecture") != expected_arch:
                raise CheckpointError(
                    f"{path}: architecture {meta.get('architecture')!r} does not "
                    f"match target {expected_arch!r}"
                )
            target_state = _part_state(model, part)
            names = set(meta["arrays"])
            if names != set(target_state):
                missing = sorted(set(target_state) - names)
                extra = sorted(names - set(target_state))
                raise CheckpointError(
                    f"{path}: state mismatch (missing {missing}, unexpected {extra})"
                )
            for name, info in meta["arrays"].items():
                loaded = np.lib.format.read_array(
                    io.BytesIO(archive.read(f"{name}.npy")), allow_pickle=False
                )
                if _sha256(loaded) != info["sha256"]:
                    raise CheckpointError(f"{path}: checksum mismatch for {name!r}")
                target = target_state[name]
                if loaded.shape != target.shape or str(loaded.dtype) != str(target.dtype):
                    raise CheckpointError(
                        f"{path}: array {name!r} is {loaded.dtype}{loaded.shape}, "
                        f"target is {target.dtype}{target.shape}"
                    )
                target[...] = loaded
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    return model
