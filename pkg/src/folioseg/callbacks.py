"""Callback hooks: user code injected into fixed points of the run lifecycle.

Dispatch order within one epoch is fixed: ``on_train_epoch_start``, then
``on_train_batch_end`` per training batch, then ``on_validation_batch_end``
per validation batch, then ``on_validation_epoch_end``. ``on_fit_start`` and
``on_fit_end`` bracket the whole fit; ``on_test_batch_end`` fires during the
test stage. A callback that raises aborts the run, with the callback and
hook named; silent continuation would corrupt the experiment record.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .errors import TrainingError


class CallbackHook(Enum):
    ON_FIT_START = "on_fit_start"
    ON_TRAIN_EPOCH_START = "on_train_epoch_start"
    ON_TRAIN_BATCH_END = "on_train_batch_end"
    ON_VALIDATION_BATCH_END = "on_validation_batch_end"
    ON_VALIDATION_EPOCH_END = "on_validation_epoch_end"
    ON_TEST_BATCH_END = "on_test_batch_end"
    ON_FIT_END = "on_fit_end"


@dataclass(frozen=True)
class CallbackContext:
    """Read-only view of the run state a hook receives.

    Fields that do not apply to a hook (e.g. ``batch`` at fit start) are None.
    """

    trainer: Any
    task: Any
    epoch: int | None = None
    step: int | None = None
    outputs: Any = None
    batch: Any = None
    batch_idx: int | None = None
    loader_idx: int | None = None
    run_dir: Path | None = None


class Callback:
    """Base class; override the hook methods you need."""

    def on_fit_start(self, ctx: CallbackContext) -> None: ...

    def on_train_epoch_start(self, ctx: CallbackContext) -> None: ...

    def on_train_batch_end(self, ctx: CallbackContext) -> None: ...

    def on_validation_batch_end(self, ctx: CallbackContext) -> None: ...

    def on_validation_epoch_end(self, ctx: CallbackContext) -> None: ...

    def on_test_batch_end(self, ctx: CallbackContext) -> None: ...

    def on_fit_end(self, ctx: CallbackContext) -> None: ...


def _overridden_hooks(callback: Callback) -> set[CallbackHook]:
    hooks = set()
    for hook in CallbackHook:
        if getattr(type(callback), hook.value) is not getattr(Callback, hook.value):
            hooks.add(hook)
    return hooks


class CallbackDispatcher:
    """Ordered registrations plus hook dispatch."""

    def __init__(self, callbacks: list[Callback] | None = None):
        self._registrations: list[tuple[Callback, set[CallbackHook]]] = []
        for callback in callbacks or []:
            self.register(callback)

    def register(self, callback: Callback, hooks: set[CallbackHook] | None = None) -> int:
        """Register for the given hooks (default: all overridden methods)."""
        if any(existing is callback for existing, _ in self._registrations):
            raise TrainingError(f"callback {type(callback).__name__} already registered")
        if hooks is None:
            hooks = _overridden_hooks(callback) or set(CallbackHook)
        if not hooks:
            raise TrainingError("cannot register a callback for zero hooks")
        self._registrations.append((callback, set(hooks)))
        return len(self._registrations) - 1

    def dispatch(self, hook: CallbackHook, ctx: CallbackContext) -> None:
        for callback, hooks in self._registrations:
            if hook not in hooks:
                continue
            try:
                getattr(callback, hook.value)(ctx)
            except Exception as exc:
                raise TrainingError(
                    f"callback {type(callback).__name__} failed at {hook.value}: {exc}"
                ) from exc


class CompatibilityCheck(Callback):
    """Aborts the fit if the backbone and header interfaces disagree."""

    def on_fit_start(self, ctx: CallbackContext) -> None:
        result = ctx.task.model.check()
        if not result.ok:
            raise TrainingError(
                "backbone/header mismatch: " + "; ".join(result.mismatches)
            )


class ModelPartSaver(Callback):
    """Writes backbone, header, and full checkpoints at fit end."""

    def __init__(self, directory: str = "checkpoints"):
        self.directory = directory

    def on_fit_end(self, ctx: CallbackContext) -> None:
        from .models.checkpoint import save_part

        target = Path(ctx.run_dir) / self.directory
        for part in ("backbone", "header", "full"):
            save_part(ctx.task.model, part, target / f"{part}.ckpt")


class GradientStats(Callback):
    """Logs mean/std/min/max of every parameter gradient after each batch."""

    def on_train_batch_end(self, ctx: CallbackContext) -> None:
        logger = ctx.trainer.logger
        if logger is None:
            return
        for name, grad in ctx.task.model.named_grads().items():
            for stat, value in (
                ("mean", float(grad.mean())),
                ("std", float(grad.std())),
                ("min", float(grad.min())),
                ("max", float(grad.max())),
            ):
                logger.log_scalar(f"grad/{name}/{stat}", value, step=ctx.step, epoch=ctx.epoch)


class ValidationOutputSaver(Callback):
    """Writes the raw network outputs of every validation batch to disk."""

    def __init__(self, directory: str = "val_outputs"):
        self.directory = directory

    def on_validation_batch_end(self, ctx: CallbackContext) -> None:
        target = Path(ctx.run_dir) / self.directory
        target.mkdir(parents=True, exist_ok=True)
        np.savez(
            target / f"epoch{ctx.epoch:03d}_batch{ctx.batch_idx:04d}.npz",
            logits=ctx.outputs["logits"],
        )
