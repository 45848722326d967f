import csv
import hashlib
import math

import numpy as np
import pytest
from PIL import Image

from folioseg.callbacks import Callback, ValidationOutputSaver
from folioseg.data.datamodule import Batch, PatchDataModule
from folioseg.data.encoding import DEFAULT_ENCODING
from folioseg.engine.manifest import RunManifest
from folioseg.engine.trainer import Trainer, TrainPlan
from folioseg.errors import CheckpointError, TrainingError
from folioseg.metrics import MeanIoU
from folioseg.models.unet import build_unet
from folioseg.seeding import seed_everything
from folioseg.tasks import SemanticSegmentation, format_for_loss, format_for_metric

from test_callbacks_logging import Recorder
from folioseg.loggers import CsvLogger, MemorySink, MultiLogger


def make_datamodule(corpus) -> PatchDataModule:
    dm = PatchDataModule(str(corpus), crop_size=32, subcrop_size=24, test_crop_size=32, overlap=0.5)
    dm.setup()
    return dm


def make_task(seed: int) -> SemanticSegmentation:
    seed_everything(seed)
    model = build_unet(8, base_channels=4, depth=2)
    return SemanticSegmentation(model=model)


def run_fit(corpus, run_dir, seed=5, epochs=2, callbacks=None, logger=None):
    task = make_task(seed)
    trainer = Trainer(
        TrainPlan(max_epochs=epochs, batch_size=8, seed=seed),
        run_dir=run_dir, callbacks=callbacks, logger=logger,
    )
    manifest = trainer.fit(task, make_datamodule(corpus))
    return trainer, task, manifest


class TestFitBookkeeping:
    def test_two_epoch_manifest(self, tiny_corpus, tmp_path):
        _, _, manifest = run_fit(tiny_corpus, tmp_path / "run")
        assert len(manifest.epochs) == 2
        assert [e.epoch for e in manifest.epochs] == [0, 1]
        assert set(manifest.checkpoints) == {"best", "last"}
        assert manifest.best_epoch is not None
        reloaded = RunManifest.load(tmp_path / "run" / "manifest.json")
        assert reloaded.seed == manifest.seed
        assert len(reloaded.epochs) == 2

    def test_csv_has_each_epoch_key_once(self, tiny_corpus, tmp_path):
        logger = MultiLogger([CsvLogger()])
        run_fit(tiny_corpus, tmp_path / "run", logger=logger)
        rows = list(csv.DictReader((tmp_path / "run" / "metrics.csv").open()))
        for key in ("train/loss", "val/loss", "val/miou"):
            for epoch in ("0", "1"):
                matches = [r for r in rows if r["key"] == key and r["epoch"] == epoch]
                assert len(matches) == 1, (key, epoch)

    def test_device_accelerator_rejected(self, tiny_corpus, tmp_path):
        task = make_task(0)
        trainer = Trainer(TrainPlan(seed=0, device="accelerator"), run_dir=tmp_path / "run")
        with pytest.raises(TrainingError, match="device"):
            trainer.fit(task, make_datamodule(tiny_corpus))

    def test_incompatible_model_rejected(self, tiny_corpus, tmp_path):
        from folioseg.models.compose import ComposedModel
        from folioseg.models.unet import ConvHeader, UNetBackbone

        rng = np.random.default_rng(0)
        model = ComposedModel(
            UNetBackbone(3, 4, 2, rng), ConvHeader(8, 5, rng)  # 4-channel trunk vs 8-channel header
        )
        task = SemanticSegmentation(model=model)
        trainer = Trainer(TrainPlan(seed=0), run_dir=tmp_path / "run")
        with pytest.raises(TrainingError, match="mismatch"):
            trainer.fit(task, make_datamodule(tiny_corpus))


class TestDeterminism:
    def digest_checkpoint(self, path) -> str:
        return hashlib.sha256(path.read_bytes()).hexdigest()

    def test_same_seed_identical_runs(self, tiny_corpus, tmp_path):
        _, _, first = run_fit(tiny_corpus, tmp_path / "a", seed=11)
        _, _, second = run_fit(tiny_corpus, tmp_path / "b", seed=11)
        losses_a = [(e.train_loss, e.val_loss, e.val_miou) for e in first.epochs]
        losses_b = [(e.train_loss, e.val_loss, e.val_miou) for e in second.epochs]
        assert losses_a == losses_b
        assert self.digest_checkpoint(tmp_path / "a" / "checkpoints" / "last.ckpt") == \
            self.digest_checkpoint(tmp_path / "b" / "checkpoints" / "last.ckpt")

    def test_different_seed_differs(self, tiny_corpus, tmp_path):
        _, _, first = run_fit(tiny_corpus, tmp_path / "a", seed=11)
        _, _, second = run_fit(tiny_corpus, tmp_path / "b", seed=12)
        assert first.epochs[0].train_loss != second.epochs[0].train_loss

    def test_read_only_callback_does_not_change_results(self, tiny_corpus, tmp_path):
        _, _, plain = run_fit(tiny_corpus, tmp_path / "plain", seed=11)
        _, _, observed = run_fit(tiny_corpus, tmp_path / "observed", seed=11, callbacks=[Recorder()])
        assert [e.train_loss for e in plain.epochs] == [e.train_loss for e in observed.epochs]


class TestHookProtocol:
    def test_documented_order_one_epoch_fit_and_test(self, tiny_corpus, tmp_path):
        recorder = Recorder()
        trainer, task, manifest = run_fit(
            tiny_corpus, tmp_path / "run", epochs=1, callbacks=[recorder]
        )
        trainer.test(task, make_datamodule(tiny_corpus), manifest=manifest)
        names = [name for name, *_ in recorder.events]
        # Every hook fires at least once.
        assert set(names) == {
            "on_fit_start", "on_train_epoch_start", "on_train_batch_end",
            "on_validation_batch_end", "on_validation_epoch_end",
            "on_test_batch_end", "on_fit_end",
        }
        # And in the documented order within the epoch.
        assert names[0] == "on_fit_start"
        assert names[1] == "on_train_epoch_start"
        train_part = names[2 : 2 + names.count("on_train_batch_end")]
        assert set(train_part) == {"on_train_batch_end"}
        after_train = names[2 + len(train_part) :]
        val_part = after_train[: after_train.index("on_validation_epoch_end")]
        assert set(val_part) == {"on_validation_batch_end"}
        assert after_train[len(val_part)] == "on_validation_epoch_end"
        assert names[-recorder.events.count(("on_test_batch_end", None, None)) - 1] != "on_fit_start"
        assert "on_fit_end" in names
        assert names.index("on_fit_end") < names.index("on_test_batch_end")

    def test_validation_output_saver_one_file_per_batch(self, tiny_corpus, tmp_path):
        run_dir = tmp_path / "run"
        saver = ValidationOutputSaver()
        run_fit(tiny_corpus, run_dir, epochs=1, callbacks=[saver])
        files = sorted((run_dir / "val_outputs").glob("*.npz"))
        # 9 val patches at batch size 8: two validation batches.
        assert len(files) == 2
        assert files[0].name == "epoch000_batch0000.npz"


class NaNLossTask(SemanticSegmentation):
    def training_step(self, batch):
        outputs = super().training_step(batch)
        if not hasattr(self, "_tripped"):
            self._tripped = True
            return {"loss": float("nan"), "logits": outputs["logits"]}
        return outputs


class TestFailureModes:
    def test_non_finite_loss_names_epoch_and_batch(self, tiny_corpus, tmp_path):
        seed_everything(3)
        task = NaNLossTask(model=build_unet(8, base_channels=4, depth=2))
        trainer = Trainer(TrainPlan(max_epochs=1, batch_size=8, seed=3), run_dir=tmp_path / "run")
        with pytest.raises(TrainingError, match=r"epoch 0, batch 0"):
            trainer.fit(task, make_datamodule(tiny_corpus))

    def test_missing_checkpoint(self, tiny_corpus, tmp_path):
        task = make_task(0)
        trainer = Trainer(TrainPlan(seed=0, batch_size=8), run_dir=tmp_path / "fresh")
        with pytest.raises(CheckpointError, match="not found"):
            trainer.test(task, make_datamodule(tiny_corpus))

    def test_bad_plan_rejected(self):
        with pytest.raises(TrainingError):
            TrainPlan(max_epochs=0)
        with pytest.raises(TrainingError):
            TrainPlan(batch_size=0)


class TestTestStage:
    def test_outputs_for_every_page(self, tiny_corpus, tmp_path):
        trainer, task, manifest = run_fit(tiny_corpus, tmp_path / "run", epochs=1)
        datamodule = make_datamodule(tiny_corpus)
        outputs = trainer.test(task, datamodule, manifest=manifest)
        page_ids = {p.page_id for p in datamodule.test_pages()}
        assert set(outputs.label_maps) == page_ids
        assert manifest.test is not None
        assert manifest.test["checkpoint"].endswith("best.ckpt")
        for page_id in page_ids:
            png = tmp_path / "run" / "test_output" / f"{page_id}.png"
            assert png.is_file()
            with Image.open(png) as img:
                rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
            decoded, _ = DEFAULT_ENCODING.decode_image(rgb)
            assert np.array_equal(decoded, outputs.label_maps[page_id])
        assert (tmp_path / "run" / "test_output" / "summary.txt").is_file()
        assert (tmp_path / "run" / "test_output" / "report.txt").is_file()


class TestFormatHelpers:
    def test_case_study_shapes(self):
        output = np.zeros((2, 8, 256, 256), dtype=np.float32)
        labels = np.zeros((2, 256, 256), dtype=np.int64)
        logits, targets = format_for_loss(output, labels)
        assert logits.shape == (131072, 8)
        assert targets.shape == (131072,)

    def test_single_pixel(self):
        logits, targets = format_for_loss(np.zeros((1, 8, 1, 1)), np.zeros((1, 1, 1), dtype=int))
        assert logits.shape == (1, 8)
        assert targets.shape == (1,)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(TrainingError, match="mismatch"):
            format_for_loss(np.zeros((1, 8, 4, 4)), np.zeros((1, 5, 4), dtype=int))

    def test_pixel_order_preserved(self):
        output = np.arange(2 * 3 * 2 * 2, dtype=np.float64).reshape(2, 3, 2, 2)
        logits, _ = format_for_loss(output, np.zeros((2, 2, 2), dtype=int))
        assert np.array_equal(logits[0], output[0, :, 0, 0])
        assert np.array_equal(logits[1], output[0, :, 0, 1])

    def test_one_hot_logits_give_zero_loss_and_perfect_metric(self):
        from folioseg.nn.losses import CrossEntropyLoss

        rng = np.random.default_rng(0)
        labels = rng.integers(0, 8, size=(2, 4, 4))
        scale = 30.0
        output = np.zeros((2, 8, 4, 4))
        for n in range(2):
            for y in range(4):
                for x in range(4):
                    output[n, labels[n, y, x], y, x] = scale
        logits, targets = format_for_loss(output, labels)
        loss_value = CrossEntropyLoss()(logits, targets)
        expected = math.log(1.0 + 7 * math.exp(-scale))
        assert loss_value == pytest.approx(expected, abs=1e-12)

        predictions, metric_targets = format_for_metric(output, labels)
        metric = MeanIoU(8)
        metric.update(predictions, metric_targets)
        assert metric.compute() == 1.0
