"""Human-readable and machine-readable evaluation reports.

All percentages carry two decimals. The machine summary is plain
``key=value`` lines so shell pipelines and CI can parse it without a YAML
or JSON reader.
"""

import math

from .metrics import CorpusReport, MetricReport


def _pct(value: float) -> str:
    return f"{value * 100:.2f}"


def _class_lines(report: MetricReport, class_names: tuple[str, ...] | None):
    for index, (iou, f1) in enumerate(zip(report.per_class_iou, report.per_class_f1)):
        name = class_names[index] if class_names else str(index)
        if math.isnan(iou):
            yield index, name, None, None
        else:
            yield index, name, iou, f1


def format_report(corpus: CorpusReport, class_names: tuple[str, ...] | None = None) -> str:
    """Render the corpus report as text."""
    lines = ["== corpus =="]
    agg = corpus.aggregate
    lines.append(f"mIoU[%]:        {_pct(agg.miou)}")
    lines.append(f"macro F1[%]:    {_pct(agg.macro_f1)}")
    lines.append(f"weighted F1[%]: {_pct(agg.weighted_f1)}")
    lines.append(f"pixels:         {agg.pixel_count}")
    lines.append("-- per class (IoU[%] / F1[%]) --")
    for index, name, iou, f1 in _class_lines(agg, class_names):
        if iou is None:
            lines.append(f"  {index} {name}: absent")
        else:
            lines.append(f"  {index} {name}: {_pct(iou)} / {_pct(f1)}")
    for page_id, report in sorted(corpus.pages.items()):
        lines.append(f"== page {page_id} ==")
        lines.append(
            f"mIoU[%]: {_pct(report.miou)}  macro F1[%]: {_pct(report.macro_f1)}  "
            f"weighted F1[%]: {_pct(report.weighted_f1)}"
        )
    return "\n".join(lines) + "\n"


def summary_lines(corpus: CorpusReport) -> list[str]:
    """``key=value`` lines for the aggregate and each page."""
    agg = corpus.aggregate
    lines = [
        f"miou={_pct(agg.miou)}",
        f"macro_f1={_pct(agg.macro_f1)}",
        f"weighted_f1={_pct(agg.weighted_f1)}",
        f"pixels={agg.pixel_count}",
    ]
    for index, _, iou, f1 in _class_lines(agg, None):
        if iou is not None:
            lines.append(f"class.{index}.iou={_pct(iou)}")
            lines.append(f"class.{index}.f1={_pct(f1)}")
    for page_id, report in sorted(corpus.pages.items()):
        lines.append(f"page.{page_id}.miou={_pct(report.miou)}")
        lines.append(f"page.{page_id}.macro_f1={_pct(report.macro_f1)}")
    return lines


def parse_summary(text: str) -> dict[str, str]:
    """Inverse of summary_lines for tests and tooling."""
    pairs = {}
    for line in text.splitlines():
        line = line.strip()
        if line and "=" in line:
            key, value = line.split("=", 1)
            pairs[key] = value
    return pairs
