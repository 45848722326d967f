"""Per-channel dataset statistics over crop samples."""

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import DataError
from .cropping import CropSample


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel mean and standard deviation on the [0, 1] pixel scale."""

    mean: tuple[float, float, float]
    std: tuple[float, float, float]


def compute_dataset_stats(samples: Iterable[CropSample]) -> ChannelStats:
    """Single-pass mean/std over all pixels of all sample images.

    Accumulates in float64; std is the population standard deviation.
    """
    total = np.zeros(3, dtype=np.float64)
    total_sq = np.zeros(3, dtype=np.float64)
    count = 0
    for sample in samples:
        pixels = sample.image.reshape(-1, 3).astype(np.float64) / 255.0
        total += pixels.sum(axis=0)
        total_sq += np.square(pixels).sum(axis=0)
        count += pixels.shape[0]
    if count == 0:
        raise DataError("cannot compute statistics of an empty sample set")
    mean = total / count
    var = np.maximum(total_sq / count - np.square(mean), 0.0)
    std = np.sqrt(var)
    return ChannelStats(mean=tuple(mean.tolist()), std=tuple(std.tolist()))


def normalize_image(image: np.ndarray, stats: ChannelStats) -> np.ndarray:
    """uint8 (H, W, 3) image -> standardized float32 (3, H, W) tensor."""
    mean = np.asarray(stats.mean, dtype=np.float32)
    std = np.maximum(np.asarray(stats.std, dtype=np.float32), 1e-6)
    scaled = image.astype(np.float32) / 255.0
    return ((scaled - mean) / std).transpose(2, 0, 1)
