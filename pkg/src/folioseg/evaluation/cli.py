"""Standalone evaluation command.

Compares a directory of predicted label images (GT pixel format) against a
ground-truth directory, prints the textual report, and writes the key=value
summary file.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from ..data.encoding import DEFAULT_ENCODING
from ..errors import EvaluationError, FoliosegError
from .metrics import evaluate_corpus
from .report import format_report, summary_lines


def _load_label_dir(directory: Path) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    labels, boundaries = {}, {}
    for path in sorted(directory.glob("*.png")):
        with Image.open(path) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
        page_labels, boundary = DEFAULT_ENCODING.decode_image(rgb)
        labels[path.stem] = page_labels
        boundaries[path.stem] = boundary
    if not labels:
        raise EvaluationError(f"no label images found in {directory}")
    return labels, boundaries


def evaluate_directories(
    pred_dir: str | Path,
    gt_dir: str | Path,
    ignore_boundary: bool = False,
    summary_path: str | Path | None = None,
):
    """Evaluate prediction images against GT images, matched by filename stem."""
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    predictions, _ = _load_label_dir(pred_dir)
    ground_truths, boundaries = _load_label_dir(gt_dir)
    corpus = evaluate_corpus(
        predictions,
        ground_truths,
        num_classes=DEFAULT_ENCODING.num_classes,
        ignore_boundary=ignore_boundary,
        boundary_masks=boundaries,
    )
    if summary_path is None:
        summary_path = pred_dir / "evaluation_summary.txt"
    Path(summary_path).write_text("\n".join(summary_lines(corpus)) + "\n", encoding="utf-8")
    return corpus


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="folioseg-evaluate",
        description="Pixel-level mIoU/F1 between predicted and ground-truth label images.",
    )
    parser.add_argument("--pred-dir", required=True, help="directory of predicted label PNGs")
    parser.add_argument("--gt-dir", required=True, help="directory of ground-truth PNGs")
    parser.add_argument(
        "--ignore-boundary", action="store_true",
        help="exclude boundary-flagged GT pixels from the counts",
    )
    parser.add_argument(
        "--summary", default=None,
        help="summary file path (default: <pred-dir>/evaluation_summary.txt)",
    )
    args = parser.parse_args(argv)
    try:
        corpus = evaluate_directories(
            args.pred_dir, args.gt_dir,
            ignore_boundary=args.ignore_boundary,
            summary_path=args.summary,
        )
    except FoliosegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    print(format_report(corpus, DEFAULT_ENCODING.class_names), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
