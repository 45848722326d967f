"""Pixel-level confusion matrices."""

from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = pixels with ground-truth class i predicted as class j."""

    counts: np.ndarray

    def __post_init__(self):
        counts = self.counts
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise EvaluationError(f"confusion matrix must be square, got {counts.shape}")
        if (counts < 0).any():
            raise EvaluationError("confusion matrix has negative counts")

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.num_classes != other.num_classes:
            raise EvaluationError("cannot add confusion matrices of different sizes")
        return ConfusionMatrix(self.counts + other.counts)

    @classmethod
    def zeros(cls, num_classes: int) -> "ConfusionMatrix":
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64))


def accumulate_confusion(
    pred: np.ndarray,
    gt: np.ndarray,
    num_classes: int = 8,
    ignore_boundary: bool = False,
    boundary_mask: np.ndarray | None = None,
) -> ConfusionMatrix:
    """Count every pixel of a (pred, gt) label-map pair.

    With ``ignore_boundary`` set, pixels flagged in ``boundary_mask`` are
    excluded. Matrices produced per page add up to the corpus matrix.
    """
    if pred.shape != gt.shape:
        raise EvaluationError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    pred = pred.reshape(-1).astype(np.int64)
    gt = gt.reshape(-1).astype(np.int64)
    if ignore_boundary:
        if boundary_mask is None:
            raise EvaluationError("ignore_boundary requires a boundary mask")
        if boundary_mask.size != gt.size:
            raise EvaluationError("boundary mask shape does not match label maps")
        keep = ~boundary_mask.reshape(-1)
        pred, gt = pred[keep], gt[keep]
    if ((gt < 0) | (gt >= num_classes)).any() or ((pred < 0) | (pred >= num_classes)).any():
        raise EvaluationError(f"label maps contain classes outside [0, {num_classes})")
    counts = np.bincount(gt * num_classes + pred, minlength=num_classes * num_classes)
    return ConfusionMatrix(counts.reshape(num_classes, num_classes))
