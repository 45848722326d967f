"""The trainer: executes the train/validation/test stages of a task.

One trainer drives one run. Batches come from the datamodule with seeded
shuffle and sub-crop streams derived from the plan's global seed, so two
runs with equal plan and data produce identical loss sequences and
checkpoints on a single device.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..callbacks import Callback, CallbackContext, CallbackDispatcher, CallbackHook
from ..data.datamodule import DataModule
from ..errors import TrainingError
from ..evaluation.assemble import reassemble_page
from ..evaluation.metrics import CorpusReport, evaluate_corpus
from ..evaluation.report import format_report, summary_lines
from ..loggers import MultiLogger
from ..models.checkpoint import load_part, save_part
from ..seeding import TRAIN_STREAM, VAL_STREAM, SeedState, stream_rng
from ..tasks import Task
from .manifest import EpochRecord, RunManifest

CHECKPOINT_DIR = "checkpoints"
TEST_OUTPUT_DIR = "test_output"


@dataclass(frozen=True)
class TrainPlan:
    """How long, how large, and where a fit runs."""

    max_epochs: int = 1
    batch_size: int = 1
    seed: int = 42
    device: str = "cpu"

    def __post_init__(self):
        if self.max_epochs < 1:
            raise TrainingError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class TestOutputs:
    """Per-page reassembled label maps plus the corpus metric report."""

    label_maps: dict[str, np.ndarray]
    report: CorpusReport
    output_dir: Path


class Trainer:
    def __init__(
        self,
        plan: TrainPlan,
        run_dir: str | Path,
        callbacks: list[Callback] | None = None,
        logger: MultiLogger | None = None,
    ):
        self.plan = plan
        self.run_dir = Path(run_dir)
        self.logger = logger
        self._dispatcher = CallbackDispatcher(callbacks)
        self._step = 0

    def _ctx(self, task: Task, **kwargs) -> CallbackContext:
        return CallbackContext(trainer=self, task=task, run_dir=self.run_dir, **kwargs)

    def _dispatch(self, hook: CallbackHook, ctx: CallbackContext) -> None:
        self._dispatcher.dispatch(hook, ctx)

    def _log(self, key: str, value: float, epoch: int) -> None:
        if self.logger is not None:
            self.logger.log_scalar(key, value, step=self._step, epoch=epoch)

    @staticmethod
    def _check_finite(loss: float, stage: str, epoch: int, batch_idx: int) -> None:
        if not math.isfinite(loss):
            raise TrainingError(
                f"non-finite {stage} loss {loss!r} at epoch {epoch}, batch {batch_idx}"
            )

    def fit(self, task: Task, datamodule: DataModule, config_path: str | None = None) -> RunManifest:
        """Run max_epochs of (train pass, validation pass) and checkpoint."""
        if self.plan.device != "cpu":
            raise TrainingError(
                f"cannot initialize device {self.plan.device!r}: this build runs on cpu only"
            )
        compat = task.model.check()
        if not compat.ok:
            raise TrainingError("backbone/header mismatch: " + "; ".join(compat.mismatches))

        self.run_dir.mkdir(parents=True, exist_ok=True)
        checkpoint_dir = self.run_dir / CHECKPOINT_DIR
        if self.logger is not None:
            self.logger.prepare(self.run_dir)
        seeds = SeedState.from_seed(self.plan.seed)
        manifest = RunManifest(run_dir=str(self.run_dir), seed=self.plan.seed, config_path=config_path)

        self._dispatch(CallbackHook.ON_FIT_START, self._ctx(task))
        best_miou = -1.0
        for epoch in range(self.plan.max_epochs):
            self._dispatch(CallbackHook.ON_TRAIN_EPOCH_START, self._ctx(task, epoch=epoch, step=self._step))

            shuffle_rng = stream_rng(seeds.shuffle_seed, epoch)
            subcrop_rng = stream_rng(seeds.subcrop_seed, TRAIN_STREAM, epoch)
            train_losses = []
            for batch_idx, batch in enumerate(
                datamodule.train_batches(self.plan.batch_size, shuffle_rng, subcrop_rng)
            ):
                outputs = task.training_step(batch)
                self._check_finite(outputs["loss"], "train", epoch, batch_idx)
                train_losses.append(outputs["loss"])
                self._step += 1
                self._dispatch(
                    CallbackHook.ON_TRAIN_BATCH_END,
                    self._ctx(task, epoch=epoch, step=self._step, outputs=outputs,
                              batch=batch, batch_idx=batch_idx, loader_idx=0),
                )
            if not train_losses:
                raise TrainingError(f"epoch {epoch}: the training split yielded no batches")

            val_rng = stream_rng(seeds.subcrop_seed, VAL_STREAM, epoch)
            task.metric.reset()
            val_losses = []
            for batch_idx, batch in enumerate(
                datamodule.val_batches(self.plan.batch_size, val_rng)
            ):
                outputs = task.validation_step(batch)
                self._check_finite(outputs["loss"], "validation", epoch, batch_idx)
                val_losses.append(outputs["loss"])
                self._dispatch(
                    CallbackHook.ON_VALIDATION_BATCH_END,
                    self._ctx(task, epoch=epoch, step=self._step, outputs=outputs,
                              batch=batch, batch_idx=batch_idx, loader_idx=0),
                )
            if not val_losses:
                raise TrainingError(f"epoch {epoch}: the validation split yielded no batches")

            train_loss = float(np.mean(train_losses))
            val_loss = float(np.mean(val_losses))
            val_miou = task.metric.compute()
            self._dispatch(
                CallbackHook.ON_VALIDATION_EPOCH_END,
                self._ctx(task, epoch=epoch, step=self._step,
                          outputs={"val_loss": val_loss, "val_miou": val_miou}),
            )
            self._log("train/loss", train_loss, epoch)
            self._log("val/loss", val_loss, epoch)
            self._log("val/miou", val_miou, epoch)

            manifest.epochs.append(EpochRecord(epoch, train_loss, val_loss, val_miou))
            last_path = save_part(task.model, "full", checkpoint_dir / "last.ckpt")
            manifest.checkpoints["last"] = str(last_path)
            if val_miou > best_miou:
                best_miou = val_miou
                best_path = save_part(task.model, "full", checkpoint_dir / "best.ckpt")
                manifest.checkpoints["best"] = str(best_path)
                manifest.best_epoch = epoch
                manifest.best_val_miou = val_miou

        self._dispatch(CallbackHook.ON_FIT_END, self._ctx(task))
        manifest.save()
        if self.logger is not None:
            self.logger.flush()
        return manifest

    def test(
        self,
        task: Task,
        datamodule: DataModule,
        manifest: RunManifest | None = None,
        checkpoint: str | Path | None = None,
    ) -> TestOutputs:
        """Predict every test page from the best checkpoint and evaluate."""
        if checkpoint is None:
            if manifest is not None and "best" in manifest.checkpoints:
                checkpoint = manifest.checkpoints["best"]
            else:
                checkpoint = self.run_dir / CHECKPOINT_DIR / "best.ckpt"
        load_part(checkpoint, task.model)

        out_dir = self.run_dir / TEST_OUTPUT_DIR
        out_dir.mkdir(parents=True, exist_ok=True)
        encoding = datamodule.encoding
        label_maps: dict[str, np.ndarray] = {}
        gts: dict[str, np.ndarray] = {}
        boundaries: dict[str, np.ndarray] = {}
        for page in datamodule.test_pages():
            crops = []
            for batch_idx, (origins, images) in enumerate(
                datamodule.test_crop_batches(page, self.plan.batch_size)
            ):
                probs = task.test_step(images)
                crops.extend((x, y, p) for (x, y), p in zip(origins, probs))
                self._dispatch(
                    CallbackHook.ON_TEST_BATCH_END,
                    self._ctx(task, outputs={"probs": probs}, batch=(origins, images),
                              batch_idx=batch_idx, loader_idx=0),
                )
            label_map = reassemble_page(crops, page.width, page.height)
            Image.fromarray(encoding.encode_image(label_map)).save(out_dir / f"{page.page_id}.png")
            label_maps[page.page_id] = label_map
            gts[page.page_id], boundaries[page.page_id] = datamodule.load_gt(page)

        report = evaluate_corpus(
            label_maps, gts, num_classes=datamodule.num_classes, boundary_masks=boundaries
        )
        (out_dir / "report.txt").write_text(
            format_report(report, encoding.class_names), encoding="utf-8"
        )
        (out_dir / "summary.txt").write_text(
            "\n".join(summary_lines(report)) + "\n", encoding="utf-8"
        )
        if manifest is not None:
            manifest.test = {
                "checkpoint": str(checkpoint),
                "pages": sorted(label_maps),
                "miou": report.aggregate.miou,
                "macro_f1": report.aggregate.macro_f1,
                "weighted_f1": report.aggregate.weighted_f1,
                "output_dir": str(out_dir),
            }
            manifest.save()
        if self.logger is not None:
            self.logger.flush()
        return TestOutputs(label_maps=label_maps, report=report, output_dir=out_dir)
