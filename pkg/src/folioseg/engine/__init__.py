"""Task runtime: plans, the trainer, and run manifests."""

from .manifest import MANIFEST_NAME, EpochRecord, RunManifest
from .trainer import CHECKPOINT_DIR, TEST_OUTPUT_DIR, TestOutputs, Trainer, TrainPlan

__all__ = [
    "CHECKPOINT_DIR",
    "EpochRecord",
    "MANIFEST_NAME",
    "RunManifest",
    "TEST_OUTPUT_DIR",
    "TestOutputs",
    "TrainPlan",
    "Trainer",
]
