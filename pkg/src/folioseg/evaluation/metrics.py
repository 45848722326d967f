"""IoU and F1 metrics over confusion matrices.

Classes absent from both ground truth and prediction (union support zero)
are excluded from every mean, so a perfect prediction scores 1.0 even on a
page that lacks some classes. Macro F1 is the primary F1 figure; the
frequency-weighted variant is reported alongside it.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError
from .confusion import ConfusionMatrix


def _support(cm: ConfusionMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fn = counts.sum(axis=1) - tp
    fp = counts.sum(axis=0) - tp
    return tp, fp, fn


def _present(cm: ConfusionMatrix) -> np.ndarray:
    tp, fp, fn = _support(cm)
    present = (tp + fp + fn) > 0
    if not present.any():
        raise EvaluationError("confusion matrix is all zeros")
    return present


def iou_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """Per-class IoU; NaN for classes with no support."""
    tp, fp, fn = _support(cm)
    union = tp + fp + fn
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, tp / np.maximum(union, 1e-300), np.nan)


def f1_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """Per-class F1; NaN for classes with no support."""
    tp, fp, fn = _support(cm)
    denom = 2 * tp + fp + fn
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, 2 * tp / np.maximum(denom, 1e-300), np.nan)


def miou(cm: ConfusionMatrix) -> float:
    """Mean IoU over classes with nonzero support."""
    present = _present(cm)
    return float(iou_per_class(cm)[present].mean())


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean F1 over classes with nonzero support."""
    present = _present(cm)
    return float(f1_per_class(cm)[present].mean())


def weighted_f1(cm: ConfusionMatrix) -> float:
    """F1 weighted by ground-truth pixel frequency."""
    present = _present(cm)
    gt_counts = cm.counts.sum(axis=1).astype(np.float64)
    weights = gt_counts[present]
    if weights.sum() == 0:
        # Prediction-only support: fall back to uniform weights.
        weights = np.ones_like(weights)
    values = f1_per_class(cm)[present]
    return float((values * weights).sum() / weights.sum())


@dataclass(frozen=True)
class MetricReport:
    """Metrics derived from one confusion matrix."""

    miou: float
    macro_f1: float
    weighted_f1: float
    per_class_iou: tuple[float, ...]  # NaN where a class has no support
    per_class_f1: tuple[float, ...]
    pixel_count: int

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "MetricReport":
        return cls(
            miou=miou(cm),
            macro_f1=macro_f1(cm),
            weighted_f1=weighted_f1(cm),
            per_class_iou=tuple(iou_per_class(cm).tolist()),
            per_class_f1=tuple(f1_per_class(cm).tolist()),
            pixel_count=cm.total,
        )


@dataclass(frozen=True)
class CorpusReport:
    """Per-page metrics plus the aggregate over the summed confusion matrix."""

    pages: dict[str, MetricReport]
    aggregate: MetricReport
    confusion: ConfusionMatrix


def evaluate_corpus(
    predictions: dict[str, np.ndarray],
    ground_truths: dict[str, np.ndarray],
    num_classes: int = 8,
    ignore_boundary: bool = False,
    boundary_masks: dict[str, np.ndarray] | None = None,
) -> CorpusReport:
    """Evaluate a set of pages; the aggregate uses summed counts, not means."""
    from .confusion import accumulate_confusion

    missing = sorted(set(ground_truths) - set(predictions))
    extra = sorted(set(predictions) - set(ground_truths))
    if missing or extra:
        raise EvaluationError(
            f"page sets differ: missing predictions {missing}, unmatched {extra}"
        )
    pages = {}
    total = ConfusionMatrix.zeros(num_classes)
    for page_id in sorted(predictions):
        mask = boundary_masks.get(page_id) if boundary_masks else None
        cm = accumulate_confusion(
            predictions[page_id],
            ground_truths[page_id],
            num_classes=num_classes,
            ignore_boundary=ignore_boundary,
            boundary_mask=mask,
        )
        pages[page_id] = MetricReport.from_confusion(cm)
        total = total + cm
    return CorpusReport(pages=pages, aggregate=MetricReport.from_confusion(total), confusion=total)
