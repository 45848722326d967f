"""Evaluation: page reassembly, confusion matrices, mIoU/F1 reports."""

from .assemble import reassemble_page
from .confusion import ConfusionMatrix, accumulate_confusion
from .metrics import (
    CorpusReport,
    MetricReport,
    evaluate_corpus,
    f1_per_class,
    iou_per_class,
    macro_f1,
    miou,
    weighted_f1,
)
from .report import format_report, parse_summary, summary_lines

__all__ = [
    "ConfusionMatrix",
    "CorpusReport",
    "MetricReport",
    "accumulate_confusion",
    "evaluate_corpus",
    "f1_per_class",
    "format_report",
    "iou_per_class",
    "macro_f1",
    "miou",
    "parse_summary",
    "reassemble_page",
    "summary_lines",
    "weighted_f1",
]
