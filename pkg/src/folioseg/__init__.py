"""folioseg: configuration-driven, reproducible page-segmentation experiments.

The package is organized around four main components (datamodule, model,
task, trainer) plus the smaller loss/optimizer/metric/logger/callback pieces,
all wired together from hierarchical YAML configuration files.
"""

from . import callbacks, config, data, evaluation, loggers, models, nn, tasks
from .defaults import default_registry
from .engine import RunManifest, TestOutputs, Trainer, TrainPlan
from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    EvaluationError,
    FoliosegError,
    TrainingError,
)
from .metrics import MeanIoU
from .seeding import SeedState, seed_everything

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DataError",
    "EvaluationError",
    "FoliosegError",
    "MeanIoU",
    "RunManifest",
    "SeedState",
    "TestOutputs",
    "TrainPlan",
    "Trainer",
    "TrainingError",
    "callbacks",
    "config",
    "data",
    "default_registry",
    "evaluation",
    "loggers",
    "models",
    "nn",
    "seed_everything",
    "tasks",
]
