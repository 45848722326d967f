"""Tasks: the workflow glue between model, loss, optimizer, and metric."""

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from .errors import TrainingError
from .metrics import MeanIoU
from .nn.losses import CrossEntropyLoss, softmax
from .nn.optim import Adam, Optimizer


def format_for_loss(output: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(N, C, H, W) logits and (N, H, W) labels -> (pixels, C) and (pixels,)."""
    if output.ndim != 4 or labels.ndim != 3 or output.shape[0] != labels.shape[0] \
            or output.shape[2:] != labels.shape[1:]:
        raise TrainingError(
            f"shape mismatch between output {output.shape} and labels {labels.shape}"
        )
    classes = output.shape[1]
    logits = output.transpose(0, 2, 3, 1).reshape(-1, classes)
    return np.ascontiguousarray(logits), labels.reshape(-1)


def format_for_metric(output: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Argmax class labels and flattened targets for streaming metrics."""
    logits, targets = format_for_loss(output, labels)
    return logits.argmax(axis=1), targets


def _loss_grad_to_output(grad: np.ndarray, output_shape: tuple[int, ...]) -> np.ndarray:
    n, c, h, w = output_shape
    return np.ascontiguousarray(grad.reshape(n, h, w, c).transpose(0, 3, 1, 2))


class Task(ABC):
    """A training/validation/testing workflow over one model."""

    model: Any
    loss: Any
    optimizer: Optimizer
    metric: Any

    @abstractmethod
    def training_step(self, batch) -> dict: ...

    @abstractmethod
    def validation_step(self, batch) -> dict: ...

    @abstractmethod
    def test_step(self, images: np.ndarray) -> np.ndarray: ...


class SemanticSegmentation(Task):
    """Pixelwise classification with cross-entropy, Adam, and mIoU defaults."""

    def __init__(self, model, loss=None, optimizer=None, metric=None):
        if model is None:
            raise TrainingError("a task requires a model")
        self.model = model
        self.loss = loss if loss is not None else CrossEntropyLoss()
        self.optimizer = optimizer if optimizer is not None else Adam(lr=0.001)
        self.metric = metric if metric is not None else MeanIoU(model.num_classes)

    def training_step(self, batch) -> dict:
        output = self.model.forward(batch.images, training=True)
        logits, targets = format_for_loss(output, batch.labels)
        loss_value = self.loss(logits, targets)
        grad = _loss_grad_to_output(self.loss.backward(), output.shape)
        self.model.backward(grad.astype(output.dtype))
        self.optimizer.step(self.model.named_parameters(), self.model.named_grads())
        return {"loss": loss_value, "logits": output}

    def validation_step(self, batch) -> dict:
        output = self.model.forward(batch.images, training=False)
        logits, targets = format_for_loss(output, batch.labels)
        loss_value = self.loss(logits, targets)
        predictions, _ = format_for_metric(output, batch.labels)
        self.metric.update(predictions, targets)
        return {"loss": loss_value, "logits": output}

    def test_step(self, images: np.ndarray) -> np.ndarray:
        output = self.model.forward(images, training=False)
        return softmax(output, axis=1)
