"""Datamodules: sample delivery for the train/val/test stages.

A datamodule owns dataset discovery, split selection, patch geometry,
statistics, and batch assembly. Construction is cheap and touches no files;
``setup()`` performs discovery and validation so that configuration trees
can be built (and interpolated against) before any data exists on disk.

Sample order is defined at the sequence level: for a given seed and epoch
the (patch, sub-crop origin) sequence is identical regardless of how the
loading is scheduled.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image

from ..errors import DataError
from .cropping import CropSample, extract_patch, load_page_arrays, random_subcrop
from .encoding import DEFAULT_ENCODING, ClassEncoding
from .grid import CropGrid, build_crop_grid
from .pages import PageRecord, discover_pages, select_training_pages
from .stats import ChannelStats, compute_dataset_stats, normalize_image

_PAGE_CACHE_SIZE = 8


@dataclass(frozen=True)
class Batch:
    """One model batch: standardized images and integer label maps."""

    images: np.ndarray  # (N, 3, H, W) float32
    labels: np.ndarray  # (N, H, W) int64

    def __len__(self) -> int:
        return self.images.shape[0]


class DataModule(ABC):
    """Interface between datasets and the task runtime."""

    encoding: ClassEncoding = DEFAULT_ENCODING

    @abstractmethod
    def setup(self) -> None:
        """Discover and validate the dataset; must run before batch access."""

    @abstractmethod
    def exports(self) -> dict:
        """Run-time values this datamodule provides to config interpolation."""

    @property
    @abstractmethod
    def num_classes(self) -> int: ...

    @abstractmethod
    def train_batches(
        self, batch_size: int, shuffle_rng: np.random.Generator, subcrop_rng: np.random.Generator
    ) -> Iterator[Batch]: ...

    @abstractmethod
    def val_batches(
        self, batch_size: int, subcrop_rng: np.random.Generator
    ) -> Iterator[Batch]: ...

    @abstractmethod
    def test_pages(self) -> list[PageRecord]: ...

    @abstractmethod
    def test_crop_batches(
        self, page: PageRecord, batch_size: int
    ) -> Iterator[tuple[list[tuple[int, int]], np.ndarray]]:
        """Batches of grid crops for one test page: (origins, images)."""

    @abstractmethod
    def load_gt(self, page: PageRecord) -> tuple[np.ndarray, np.ndarray]:
        """Ground truth of one page: (label map, boundary mask)."""


class _PageCache:
    """FIFO cache of decoded page arrays, keyed by page id."""

    def __init__(self, encoding: ClassEncoding, limit: int = _PAGE_CACHE_SIZE):
        self._encoding = encoding
        self._limit = limit
        self._entries: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def get(self, page: PageRecord) -> tuple[np.ndarray, np.ndarray]:
        if page.page_id not in self._entries:
            image, labels, _ = load_page_arrays(page, self._encoding)
            if len(self._entries) >= self._limit:
                self._entries.pop(next(iter(self._entries)))
            self._entries[page.page_id] = (image, labels)
        return self._entries[page.page_id]


class PatchDataModule(DataModule):
    """On-the-fly extraction of overlapping patches from full page scans.

    Training and validation samples are grid patches of ``crop_size`` reduced
    to a random ``subcrop_size`` crop each epoch; test pages are tiled at
    ``test_crop_size`` with the same overlap (``test_crop_size`` must be
    divisible by the model's downsampling factor, which the training patch
    size need not be).
    """

    def __init__(
        self,
        data_dir: str,
        crop_size: int = 300,
        subcrop_size: int = 256,
        test_crop_size: int = 256,
        overlap: float = 0.5,
        selection_train: int | None = None,
        encoding: ClassEncoding = DEFAULT_ENCODING,
    ):
        if subcrop_size > crop_size:
            raise DataError(
                f"subcrop_size {subcrop_size} exceeds crop_size {crop_size}"
            )
        self.data_dir = Path(data_dir)
        self.crop_size = crop_size
        self.subcrop_size = subcrop_size
        self.test_crop_size = test_crop_size
        self.overlap = overlap
        self.selection_train = selection_train
        self.encoding = encoding
        self.stats: ChannelStats | None = None
        self._pages: dict[str, list[PageRecord]] = {}
        self._index: dict[str, list[tuple[int, int, int]]] = {}
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
        for split in ("train", "val", "test"):
            self._pages[split] = discover_pages(self.data_dir, split)
        if self.selection_train is not None:
            self._pages["train"] = select_training_pages(
                self._pages["train"], self.selection_train
            )
        for split in ("train", "val"):
            index = []
            for page_idx, page in enumerate(self._pages[split]):
                grid = self._grid(page, self.crop_size)
                index.extend((page_idx, x, y) for x, y in grid.origins())
            self._index[split] = index
        self.stats = compute_dataset_stats(self._iter_split_patches("train"))
        self._ready = True

    def _grid(self, page: PageRecord, crop_size: int) -> CropGrid:
        return build_crop_grid(page.width, page.height, crop_size, self.overlap)

    def _require_setup(self) -> None:
        if not self._ready:
            raise DataError("datamodule.setup() has not been called")

    def _patch(self, split: str, entry: tuple[int, int, int]) -> CropSample:
        page_idx, x, y = entry
        page = self._pages[split][page_idx]
        return extract_patch(
            page, x, y, self.crop_size,
            arrays=self._cache.get(page), encoding=self.encoding,
        )

    def _iter_split_patches(self, split: str) -> Iterator[CropSample]:
        for entry in self._index[split]:
            yield self._patch(split, entry)

    def _batches(
        self,
        split: str,
        order: np.ndarray,
        batch_size: int,
        subcrop_rng: np.random.Generator,
    ) -> Iterator[Batch]:
        assert self.stats is not None
        images, labels = [], []
        for position in order:
            sample = self._patch(split, self._index[split][int(position)])
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
        order = shuffle_rng.permutation(len(self._index["train"]))
        return self._batches("train", order, batch_size, subcrop_rng)

    def val_batches(self, batch_size, subcrop_rng):
        self._require_setup()
        order = np.arange(len(self._index["val"]))
        return self._batches("val", order, batch_size, subcrop_rng)

    def test_pages(self) -> list[PageRecord]:
        self._require_setup()
        return list(self._pages["test"])

    def test_crop_batches(self, page, batch_size):
        self._require_setup()
        assert self.stats is not None
        grid = self._grid(page, self.test_crop_size)
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
