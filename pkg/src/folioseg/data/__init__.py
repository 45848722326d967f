"""Data pipeline: page discovery, class encoding, crop geometry, datamodules."""

from .cropping import CropSample, extract_patch, load_page_arrays, random_subcrop
from .datamodule import Batch, DataModule, PatchDataModule
from .encoding import (
    BOUNDARY_BIT,
    DEFAULT_CLASS_CODES,
    DEFAULT_ENCODING,
    ClassEncoding,
    decode_gt_pixel,
)
from .grid import CropGrid, build_crop_grid
from .pages import PageRecord, discover_pages, select_training_pages
from .precrop import PrecroppedPatchDataModule, precrop_corpus
from .stats import ChannelStats, compute_dataset_stats, normalize_image
from .synthetic import generate_corpus, generate_page

__all__ = [
    "BOUNDARY_BIT",
    "Batch",
    "ChannelStats",
    "ClassEncoding",
    "CropGrid",
    "CropSample",
    "DEFAULT_CLASS_CODES",
    "DEFAULT_ENCODING",
    "DataModule",
    "PageRecord",
    "PatchDataModule",
    "PrecroppedPatchDataModule",
    "build_crop_grid",
    "compute_dataset_stats",
    "decode_gt_pixel",
    "discover_pages",
    "extract_patch",
    "generate_corpus",
    "generate_page",
    "load_page_arrays",
    "normalize_image",
    "precrop_corpus",
    "random_subcrop",
    "select_training_pages",
]
