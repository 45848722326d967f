"""Reassembling full-page label maps from overlapping crop predictions."""

from typing import Iterable

import numpy as np

from ..errors import EvaluationError


def reassemble_page(
    crops: Iterable[tuple[int, int, np.ndarray]], page_w: int, page_h: int
) -> np.ndarray:
    """Merge per-crop class probabilities into one page label map.

    ``crops`` yields (x, y, probs) with probs of shape (classes, h, w). Every
    pixel averages the probabilities of all covering crops, then takes the
    argmax; ties go to the lowest class index. Every pixel must be covered.
    """
    prob_sum: np.ndarray | None = None
    coverage = np.zeros((page_h, page_w), dtype=np.int32)
    for x, y, probs in crops:
        if probs.ndim != 3:
            raise EvaluationError(f"probability map must be (classes, h, w), got {probs.shape}")
        _, h, w = probs.shape
        if x < 0 or y < 0 or x + w > page_w or y + h > page_h:
            raise EvaluationError(
                f"crop at ({x}, {y}) size {w}x{h} lies outside the {page_w}x{page_h} page"
            )
        if prob_sum is None:
            prob_sum = np.zeros((probs.shape[0], page_h, page_w), dtype=np.float64)
        prob_sum[:, y : y + h, x : x + w] += probs
        coverage[y : y + h, x : x + w] += 1
    if prob_sum is None:
        raise EvaluationError("no crops given")
    if (coverage == 0).any():
        y, x = np.argwhere(coverage == 0)[0]
        raise EvaluationError(f"pixel (x={x}, y={y}) is covered by no crop")
    averaged = prob_sum / coverage[None, :, :]
    return averaged.argmax(axis=0).astype(np.uint8)
