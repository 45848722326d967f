"""Streaming metrics for the training loop."""

import numpy as np

from .errors import EvaluationError
from .evaluation.confusion import ConfusionMatrix, accumulate_confusion
from .evaluation.metrics import miou


class MeanIoU:
    """Accumulates a confusion matrix across batches; compute() yields mIoU."""

    def __init__(self, num_classes: int):
        if num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {num_classes}")
        self.num_classes = num_classes
        self._cm = ConfusionMatrix.zeros(num_classes)

    def update(self, pred_labels: np.ndarray, targets: np.ndarray) -> None:
        self._cm = self._cm + accumulate_confusion(
            pred_labels, targets, num_classes=self.num_classes
        )

    def compute(self) -> float:
        if self._cm.total == 0:
            raise EvaluationError("metric has seen no pixels")
        return miou(self._cm)

    def reset(self) -> None:
        self._cm = ConfusionMatrix.zeros(self.num_classes)

    @property
    def confusion(self) -> ConfusionMatrix:
        return self._cm
