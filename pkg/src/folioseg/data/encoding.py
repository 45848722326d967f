"""Ground-truth pixel encoding for layout classes.

A GT pixel is a 24-bit RGB value. The low byte carries the base-class flags
(background, comment, decoration, main text); flag combinations form the
eight layout classes. Bit 23 marks boundary pixels; it is stored but never
part of the class identity.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

BACKGROUND = 0x01
COMMENT = 0x02
DECORATION = 0x04
MAIN_TEXT = 0x08
BOUNDARY_BIT = 0x800000

# Flag combination -> class index, in the dataset's published class order.
DEFAULT_CLASS_CODES: tuple[tuple[int, str], ...] = (
    (BACKGROUND, "background"),
    (MAIN_TEXT, "main_text"),
    (DECORATION, "decoration"),
    (COMMENT, "comment"),
    (MAIN_TEXT | COMMENT, "main_text_comment"),
    (MAIN_TEXT | DECORATION, "main_text_decoration"),
    (COMMENT | DECORATION, "comment_decoration"),
    (MAIN_TEXT | DECORATION | COMMENT, "main_text_decoration_comment"),
)


@dataclass(frozen=True)
class ClassEncoding:
    """Bidirectional table between flag combinations and class indices."""

    codes: tuple[tuple[int, str], ...] = DEFAULT_CLASS_CODES
    boundary_bit: int = BOUNDARY_BIT
    _index_of: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        index_of = {}
        for index, (code, _) in enumerate(self.codes):
            if code in index_of:
                raise ValueError(f"duplicate class code 0x{code:x}")
            index_of[code] = index
        object.__setattr__(self, "_index_of", index_of)

    @property
    def num_classes(self) -> int:
        return len(self.codes)

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(name for _, name in self.codes)

    def encode(self, index: int, boundary: bool = False) -> int:
        """Class index -> 24-bit GT pixel value."""
        code, _ = self.codes[index]
        return code | (self.boundary_bit if boundary else 0)

    def decode(self, pixel: int) -> int:
        """24-bit GT pixel value -> class index; boundary bit is masked off."""
        code = pixel & ~self.boundary_bit
        try:
            return self._index_of[code]
        except KeyError:
            raise DataError(f"illegal ground-truth pixel value 0x{pixel:06x}") from None

    def is_boundary(self, pixel: int) -> bool:
        return bool(pixel & self.boundary_bit)

    def pixel_to_rgb(self, pixel: int) -> tuple[int, int, int]:
        return (pixel >> 16) & 0xFF, (pixel >> 8) & 0xFF, pixel & 0xFF

    def decode_image(self, rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Decode an (H, W, 3) uint8 GT image to class indices and a boundary mask.

        Raises DataError naming the coordinates of the first undecodable pixel.
        """
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise DataError(f"GT image must be (H, W, 3), got {rgb.shape}")
        values = (
            rgb[:, :, 0].astype(np.uint32) << 16
            | rgb[:, :, 1].astype(np.uint32) << 8
            | rgb[:, :, 2].astype(np.uint32)
        )
        boundary = (values & self.boundary_bit) != 0
        codes = values & ~np.uint32(self.boundary_bit)

        lut = np.full(256, -1, dtype=np.int16)
        for code, index in self._index_of.items():
            lut[code] = index
        in_range = codes < 256
        labels = np.where(in_range, lut[np.minimum(codes, 255)], -1)
        if (labels < 0).any():
            y, x = np.argwhere(labels < 0)[0]
            raise DataError(
                f"illegal ground-truth pixel 0x{values[y, x]:06x} at (x={x}, y={y})"
            )
        return labels.astype(np.uint8), boundary

    def encode_image(self, labels: np.ndarray, boundary: np.ndarray | None = None) -> np.ndarray:
        """Class-index map (+ optional boundary mask) -> (H, W, 3) uint8 GT image."""
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise DataError("label map contains out-of-range class indices")
        code_table = np.array([code for code, _ in self.codes], dtype=np.uint32)
        values = code_table[labels.astype(np.int64)]
        if boundary is not None:
            values = values | np.where(boundary, np.uint32(self.boundary_bit), np.uint32(0))
        rgb = np.stack(
            [(values >> 16) & 0xFF, (values >> 8) & 0xFF, values & 0xFF], axis=-1
        )
        return rgb.astype(np.uint8)


DEFAULT_ENCODING = ClassEncoding()


def decode_gt_pixel(pixel: int, encoding: ClassEncoding = DEFAULT_ENCODING) -> int:
    """Decode one 24-bit GT pixel value to its class index."""
    return encoding.decode(pixel)
