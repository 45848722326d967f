"""Dataset discovery: page records, splits, and training-page selection.

Expected layout::

    <root>/{train,val,test}/data/*.png   page scans, 8-bit RGB
    <root>/{train,val,test}/gt/*.png     label images, matched by filename stem
"""

from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from ..errors import DataError

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class PageRecord:
    page_id: str
    image_path: Path
    gt_path: Path
    width: int
    height: int


def _image_size(path: Path) -> tuple[int, int]:
    try:
        with Image.open(path) as img:
            return img.size
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc


def discover_pages(root: str | Path, split: str) -> list[PageRecord]:
    """Discover the pages of one split, sorted lexicographically by filename."""
    if split not in SPLITS:
        raise DataError(f"unknown split {split!r}, expected one of {SPLITS}")
    data_dir = Path(root) / split / "data"
    gt_dir = Path(root) / split / "gt"
    if not data_dir.is_dir() or not gt_dir.is_dir():
        raise DataError(f"split {split!r} missing under {root} (need data/ and gt/)")

    images = {p.stem: p for p in sorted(data_dir.glob("*.png"))}
    gts = {p.stem: p for p in sorted(gt_dir.glob("*.png"))}
    if not images:
        raise DataError(f"no pages found in {data_dir}")
    missing_gt = sorted(set(images) - set(gts))
    missing_img = sorted(set(gts) - set(images))
    if missing_gt or missing_img:
        raise DataError(
            f"split {split!r} mismatch: pages without GT {missing_gt}, "
            f"GT without pages {missing_img}"
        )

    records = []
    for stem in sorted(images):
        width, height = _image_size(images[stem])
        gt_w, gt_h = _image_size(gts[stem])
        if (width, height) != (gt_w, gt_h):
            raise DataError(
                f"page {stem!r}: image is {width}x{height} but GT is {gt_w}x{gt_h}"
            )
        records.append(
            PageRecord(
                page_id=stem,
                image_path=images[stem],
                gt_path=gts[stem],
                width=width,
                height=height,
            )
        )
    return records


def select_training_pages(pages: list[PageRecord], n: int) -> list[PageRecord]:
    """First ``n`` pages in lexicographic filename order."""
    if not 1 <= n <= len(pages):
        raise DataError(f"selection {n} out of range [1, {len(pages)}]")
    ordered = sorted(pages, key=lambda p: p.image_path.name)
    return ordered[:n]
