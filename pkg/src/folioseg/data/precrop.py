"""Offline pre-cropping: materialize the patch grid as files.

``precrop_corpus`` writes every train/val grid patch as a PNG pair (raw GT
slice, boundary bits preserved) and copies test pages through untouched,
since testing always works on full pages. ``PrecroppedPatchDataModule``
consumes that layout and yields the same sample sequence as on-the-fly
extraction from the original corpus.

Patch filename format: ``<page>_x<00000>_y<00000>.png``.
"""

import re
import shutil
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image

from ..errors import DataError
from .cropping import CropSample, extract_patch, load_page_arrays, random_subcrop
from .datamodule import Batch, DataModule, _PageCache
from .encoding import DEFAULT_ENCODING, ClassEncoding
from .grid import build_crop_grid
from .pages import PageRecord, discover_pages
from .stats import ChannelStats, compute_dataset_stats, normalize_image

_PATCH_NAME = re.compile(r"^(?P<stem>.+)_x(?P<x>\d{5})_y(?P<y>\d{5})$")


def patch_name(stem: str, x: int, y: int) -> str:
    return f"{stem}_x{x:05d}_y{y:05d}.png"


def precrop_corpus(
    src_root: str | Path,
    out_root: str | Path,
    crop_size: int = 300,
    overlap: float = 0.5,
    encoding: ClassEncoding = DEFAULT_ENCODING,
) -> Path:
    """Write the train/val patch grid of ``src_root`` under ``out_root``."""
    src_root, out_root = Path(src_root), Path(out_root)
    for split in ("train", "val"):
        data_dir = out_root / split / "data"
        gt_dir = out_root / split / "gt"
        data_dir.mkdir(parents=True, exist_ok=True)
        gt_dir.mkdir(parents=True, exist_ok=True)
        for page in discover_pages(src_root, split):
            image, _, _ = load_page_arrays(page, encoding)
            with Image.open(page.gt_path) as gt_img:
                gt = np.asarray(gt_img.convert("RGB"), dtype=np.uint8)
            grid = build_crop_grid(page.width, page.height, crop_size, overlap)
            for x, y in grid.origins():
                name = patch_name(page.page_id, x, y)
                Image.fromarray(image[y : y + crop_size, x : x + crop_size]).save(
                    data_dir / name
                )
                Image.fromarray(gt[y : y + crop_size, x : x + crop_size]).save(
                    gt_dir / name
                )
    for sub in ("data", "gt"):
        src = src_root / "test" / sub
        dst = out_root / "test" / sub
        dst.mkdir(parents=True, exist_ok=True)
        for path in sorted(src.glob("*.png")):
            shutil.copyfile(path, dst / path.name)
    return out_root


class PrecroppedPatchDataModule(DataModule):
    """Reads a pre-cropped corpus; test pages remain full scans."""

    def __init__(
        self,
        data_dir: str,
        subcrop_size: int = 256,
        test_crop_size: int = 256,
        overlap: float = 0.5,
        selection_train: int | None = None,
        encoding: ClassEncoding = DEFAULT_ENCODING,
    ):
        self.data_dir = Path(data_dir)
        self.subcrop_size = subcrop_size
        self.test_crop_size = test_crop_size
        self.overlap = overlap
        self.selection_train = selection_train
        self.encoding = encoding
        self.stats: ChannelStats | None = None
        self._patches: dict[str, list[tuple[str, int, int, Path, Path]]] = {}
        self._test_pages: list[PageRecord] = []
        self._cache = _PageCache(encoding)
        self._ready = False

    @property
    def num_classes(self) -> int:
        return self.encoding.num_classes

    def exports(self) -> dict:
        return {"num_classes": self.num_classes}

    def setup(self) -> None:
        if self._ready:
            return
        for split in ("train", "val"):
            self._patches[split] = self._discover_patches(split)
        if self.selection_train is not None:
            stems = sorted({stem for stem, *_ in self._patches["train"]})
            if not 1 <= self.selection_train <= len(stems):
                raise DataError(
                    f"selection {self.selection_train} out of range [1, {len(stems)}]"
                )
            keep = set(stems[: self.selection_train])
            self._patches["train"] = [
                entry for entry in self._patches["train"] if entry[0] in keep
            ]
        self._test_pages = discover_pages(self.data_dir, "test")
        self.stats = compute_dataset_stats(self._iter_split_patches("train"))
        self._ready = True

    def _discover_patches(self, split: str):
        data_dir = self.data_dir / split / "data"
        gt_dir = self.data_dir / split / "gt"
        if not data_dir.is_dir() or not gt_dir.is_dir():
            raise DataError(f"split {split!r} missing under {self.data_dir}")
        entries = []
        for path in sorted(data_dir.glob("*.png")):
            match = _PATCH_NAME.match(path.stem)
            if not match:
                raise DataError(f"not a patch filename: {path.name}")
            gt_path = gt_dir / path.name
            if not gt_path.is_file():
                raise DataError(f"patch {path.name} has no GT counterpart")
            entries.append(
                (match["stem"], int(match["x"]), int(match["y"]), path, gt_path)
            )
        if not entries:
            raise DataError(f"no patches found in {data_dir}")
        # Same canonical order as on-the-fly extraction: page, then row-major.
        entries.sort(key=lambda e: (e[0], e[2], e[1]))
        return entries

    def _read_patch(self, entry) -> CropSample:
        stem, x, y, img_path, gt_path = entry
        with Image.open(img_path) as img:
            image = np.asarray(img.convert("RGB"), dtype=np.uint8)
        with Image.open(gt_path) as gt_img:
            gt = np.asarray(gt_img.convert("RGB"), dtype=np.uint8)
        labels, _ = self.encoding.decode_image(gt)
        return CropSample(page_id=stem, x=x, y=y, image=image, labels=labels)

    def _iter_split_patches(self, split: str) -> Iterator[CropSample]:
        for entry in self._patches[split]:
            yield self._read_patch(entry)

    def _require_setup(self) -> None:
        if not self._ready:
            raise DataError("datamodule.setup() has not been called")

    def _batches(self, split, order, batch_size, subcrop_rng) -> Iterator[Batch]:
        assert self.stats is not None
        images, labels = [], []
        for position in order:
            sample = self._read_patch(self._patches[split][int(position)])
            sample = random_subcrop(sample, self.subcrop_size, subcrop_rng)
            images.append(normalize_image(sample.image, self.stats))
            labels.append(sample.labels.astype(np.int64))
            if len(images) == batch_size:
                yield Batch(np.stack(images), np.stack(labels))
                images, labels = [], []
        if images:
            yield Batch(np.stack(images), np.stack(labels))

    def train_batches(self, batch_size, shuffle_rng, subcrop_rng):
        self._require_setup()
        order = shuffle_rng.permutation(len(self._patches["train"]))
        return self._batches("train", order, batch_size, subcrop_rng)

    def val_batches(self, batch_size, subcrop_rng):
        self._require_setup()
        order = np.arange(len(self._patches["val"]))
        return self._batches("val", order, batch_size, subcrop_rng)

    def test_pages(self) -> list[PageRecord]:
        self._require_setup()
        return list(self._test_pages)

    def test_crop_batches(self, page, batch_size):
        self._require_setup()
        assert self.stats is not None
        grid = build_crop_grid(page.width, page.height, self.test_crop_size, self.overlap)
        origins_batch, images = [], []
        for x, y in grid.origins():
            sample = extract_patch(
                page, x, y, self.test_crop_size,
                arrays=self._cache.get(page), encoding=self.encoding,
            )
            origins_batch.append((x, y))
            images.append(normalize_image(sample.image, self.stats))
            if len(images) == batch_size:
                yield origins_batch, np.stack(images)
                origins_batch, images = [], []
        if images:
            yield origins_batch, np.stack(images)

    def load_gt(self, page):
        _, labels, boundary = load_page_arrays(page, self.encoding)
        return labels, boundary
