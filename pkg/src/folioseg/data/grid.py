"""Deterministic tiling of a page into overlapping square crops."""

import math
from dataclasses import dataclass

from ..errors import DataError


@dataclass(frozen=True)
class CropGrid:
    """Top-left crop origins covering a page.

    Offsets start at 0 and advance by ``stride``; the final offset is snapped
    to ``dim - crop_size`` so the last crop ends exactly at the page border.
    """

    crop_size: int
    stride: int
    x_positions: tuple[int, ...]
    y_positions: tuple[int, ...]

    @property
    def patch_count(self) -> int:
        return len(self.x_positions) * len(self.y_positions)

    def origins(self) -> list[tuple[int, int]]:
        """All (x, y) origins, row-major (y outer, x inner)."""
        return [(x, y) for y in self.y_positions for x in self.x_positions]


def _axis_positions(dim: int, crop_size: int, stride: int) -> tuple[int, ...]:
    positions = []
    offset = 0
    while offset + crop_size < dim:
        positions.append(offset)
        offset += stride
    final = dim - crop_size
    if not positions or positions[-1] != final:
        positions.append(final)
    return tuple(positions)


def build_crop_grid(dim_w: int, dim_h: int, crop_size: int, overlap: float) -> CropGrid:
    """Build the crop grid for a ``dim_w x dim_h`` page.

    ``stride = round(crop_size * (1 - overlap))`` with half-up rounding.
    """
    if not 0.0 <= overlap < 1.0:
        raise DataError(f"overlap must be in [0, 1), got {overlap}")
    if crop_size > min(dim_w, dim_h):
        raise DataError(
            f"crop size {crop_size} exceeds page dimensions {dim_w}x{dim_h}"
        )
    if crop_size < 1:
        raise DataError(f"crop size must be positive, got {crop_size}")
    stride = math.floor(crop_size * (1.0 - overlap) + 0.5)
    if stride < 1:
        raise DataError(
            f"overlap {overlap} leaves a zero stride for crop size {crop_size}"
        )
    return CropGrid(
        crop_size=crop_size,
        stride=stride,
        x_positions=_axis_positions(dim_w, crop_size, stride),
        y_positions=_axis_positions(dim_h, crop_size, stride),
    )
