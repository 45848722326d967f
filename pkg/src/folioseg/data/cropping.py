"""Patch extraction and random training sub-crops."""

from dataclasses import dataclass, replace

import numpy as np
from PIL import Image

from ..errors import DataError
from .encoding import DEFAULT_ENCODING, ClassEncoding
from .pages import PageRecord


@dataclass(frozen=True)
class CropSample:
    """One square patch: raw image pixels plus decoded class labels."""

    page_id: str
    x: int
    y: int
    image: np.ndarray  # (crop, crop, 3) uint8
    labels: np.ndarray  # (crop, crop) uint8 class indices
    subcrop_origin: tuple[int, int] | None = None

    @property
    def crop_size(self) -> int:
        return self.image.shape[0]


def load_page_arrays(
    page: PageRecord, encoding: ClassEncoding = DEFAULT_ENCODING
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a page from disk: (image, labels, boundary mask)."""
    try:
        with Image.open(page.image_path) as img:
            image = np.asarray(img.convert("RGB"), dtype=np.uint8)
        with Image.open(page.gt_path) as gt_img:
            gt = np.asarray(gt_img.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise DataError(f"cannot read page {page.page_id!r}: {exc}") from exc
    try:
        labels, boundary = encoding.decode_image(gt)
    except DataError as exc:
        raise DataError(f"page {page.page_id!r}: {exc}") from None
    return image, labels, boundary


def extract_patch(
    page: PageRecord,
    x: int,
    y: int,
    crop_size: int,
    *,
    arrays: tuple[np.ndarray, np.ndarray] | None = None,
    encoding: ClassEncoding = DEFAULT_ENCODING,
) -> CropSample:
    """Cut the ``crop_size`` patch with top-left corner (x, y) out of a page.

    ``arrays`` may pass pre-loaded (image, labels) to avoid re-reading the
    page for every patch.
    """
    if arrays is None:
        image, labels, _ = load_page_arrays(page, encoding)
    else:
        image, labels = arrays
    height, width = labels.shape
    if x < 0 or y < 0 or x + crop_size > width or y + crop_size > height:
        raise DataError(
            f"patch origin ({x}, {y}) size {crop_size} outside page "
            f"{page.page_id!r} ({width}x{height})"
        )
    return CropSample(
        page_id=page.page_id,
        x=x,
        y=y,
        image=np.ascontiguousarray(image[y : y + crop_size, x : x + crop_size]),
        labels=np.ascontiguousarray(labels[y : y + crop_size, x : x + crop_size]),
    )


def random_subcrop(patch: CropSample, out_size: int, rng: np.random.Generator) -> CropSample:
    """Take one random ``out_size`` sub-crop, identical for image and labels.

    The origin is drawn uniformly from ``[0, crop - out]^2`` (x first, then
    y), so the output sequence is fully determined by the generator state.
    """
    crop = patch.crop_size
    if out_size > crop:
        raise DataError(f"sub-crop {out_size} larger than patch {crop}")
    span = crop - out_size
    dx = int(rng.integers(0, span + 1))
    dy = int(rng.integers(0, span + 1))
    return replace(
        patch,
        image=np.ascontiguousarray(patch.image[dy : dy + out_size, dx : dx + out_size]),
        labels=np.ascontiguousarray(patch.labels[dy : dy + out_size, dx : dx + out_size]),
        subcrop_origin=(dx, dy),
    )
