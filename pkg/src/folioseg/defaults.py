"""The default component registry used by the runner.

Registry paths mirror the public import paths, so a config that names
``folioseg.models.UNet`` documents exactly which class it builds.
"""

from .callbacks import CompatibilityCheck, GradientStats, ModelPartSaver, ValidationOutputSaver
from .config.registry import Registry
from .data.datamodule import PatchDataModule
from .data.precrop import PrecroppedPatchDataModule
from .loggers import CsvLogger, MemorySink
from .metrics import MeanIoU
from .models.unet import UNet
from .nn.losses import CrossEntropyLoss
from .nn.optim import SGD, Adam
from .tasks import SemanticSegmentation

DEFAULT_COMPONENTS = {
    "folioseg.models.UNet": UNet,
    "folioseg.losses.CrossEntropyLoss": CrossEntropyLoss,
    "folioseg.optim.Adam": Adam,
    "folioseg.optim.SGD": SGD,
    "folioseg.metrics.MeanIoU": MeanIoU,
    "folioseg.data.PatchDataModule": PatchDataModule,
    "folioseg.data.PrecroppedPatchDataModule": PrecroppedPatchDataModule,
    "folioseg.tasks.SemanticSegmentation": SemanticSegmentation,
    "folioseg.callbacks.CompatibilityCheck": CompatibilityCheck,
    "folioseg.callbacks.ModelPartSaver": ModelPartSaver,
    "folioseg.callbacks.GradientStats": GradientStats,
    "folioseg.callbacks.ValidationOutputSaver": ValidationOutputSaver,
    "folioseg.loggers.CsvLogger": CsvLogger,
    "folioseg.loggers.MemorySink": MemorySink,
}


def default_registry() -> Registry:
    registry = Registry()
    for path, constructor in DEFAULT_COMPONENTS.items():
        registry.register(path, constructor)
    return registry
