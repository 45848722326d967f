"""Synthetic test corpus: colored stroke blocks on a parchment background.

The generator exists for desk-scale experiments and tests. Pages carry one
rectangle block per layout class (placed in disjoint zones so every class is
present on every page), filled with text-like horizontal strokes in a
class-specific ink color. Ground truth uses the same pixel encoding as real
corpora, including a one-pixel boundary rim around each block.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from .encoding import DEFAULT_ENCODING, ClassEncoding

PARCHMENT = (225, 214, 188)

# Distinct ink colors per non-background class index.
CLASS_COLORS = {
    1: (62, 42, 34),  # main_text: dark brown
    2: (196, 152, 58),  # decoration: gold
    3: (158, 52, 48),  # comment: red
    4: (96, 48, 116),  # main_text_comment: purple
    5: (48, 112, 152),  # main_text_decoration: teal
    6: (112, 138, 58),  # comment_decoration: olive
    7: (38, 38, 42),  # main_text_decoration_comment: near black
}


def generate_page(
    rng: np.random.Generator,
    width: int,
    height: int,
    encoding: ClassEncoding = DEFAULT_ENCODING,
) -> tuple[np.ndarray, np.ndarray]:
    """Render one synthetic page; returns (image, gt) as (H, W, 3) uint8."""
    image = np.empty((height, width, 3), dtype=np.float32)
    image[:] = PARCHMENT
    labels = np.zeros((height, width), dtype=np.uint8)
    boundary = np.zeros((height, width), dtype=bool)

    # 4x2 zone lattice: one zone per non-background class, one left blank.
    zones = [
        (col * width // 4, row * height // 2, (col + 1) * width // 4, (row + 1) * height // 2)
        for row in range(2)
        for col in range(4)
    ]
    order = rng.permutation(len(zones))
    for class_index, color in CLASS_COLORS.items():
        zx0, zy0, zx1, zy1 = zones[order[class_index - 1]]
        zone_w, zone_h = zx1 - zx0, zy1 - zy0
        block_w = int(rng.integers(int(zone_w * 0.5), int(zone_w * 0.85)))
        block_h = int(rng.integers(int(zone_h * 0.5), int(zone_h * 0.85)))
        x0 = zx0 + int(rng.integers(0, zone_w - block_w + 1))
        y0 = zy0 + int(rng.integers(0, zone_h - block_h + 1))
        x1, y1 = x0 + block_w, y0 + block_h

        image[y0:y1, x0:x1] = color
        # Text-like stroke texture: darken alternating line bands.
        stroke_period = int(rng.integers(6, 10))
        for line_y in range(y0, y1, stroke_period):
            image[line_y : min(line_y + 2, y1), x0:x1] *= 0.72
        labels[y0:y1, x0:x1] = class_index
        rim = np.zeros_like(boundary)
        rim[y0:y1, x0:x1] = True
        rim[y0 + 1 : y1 - 1, x0 + 1 : x1 - 1] = False
        boundary |= rim

    image += rng.normal(0.0, 5.0, size=image.shape)
    image = np.clip(image, 0, 255).astype(np.uint8)
    gt = encoding.encode_image(labels, boundary)
    return image, gt


def generate_corpus(
    root: str | Path,
    n_train: int = 3,
    n_val: int = 1,
    n_test: int = 1,
    page_size: tuple[int, int] = (512, 512),
    seed: int = 0,
    encoding: ClassEncoding = DEFAULT_ENCODING,
) -> Path:
    """Write a synthetic corpus in the standard split layout; returns its root."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    width, height = page_size
    counts = {"train": n_train, "val": n_val, "test": n_test}
    page_number = 0
    for split, count in counts.items():
        data_dir = root / split / "data"
        gt_dir = root / split / "gt"
        data_dir.mkdir(parents=True, exist_ok=True)
        gt_dir.mkdir(parents=True, exist_ok=True)
        for _ in range(count):
            image, gt = generate_page(rng, width, height, encoding)
            name = f"page_{page_number:03d}.png"
            Image.fromarray(image).save(data_dir / name)
            Image.fromarray(gt).save(gt_dir / name)
            page_number += 1
    return root
