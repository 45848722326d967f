"""Backbone/header split: interface specs, compatibility, composition.

A segmentation model is an encoder-style backbone that emits feature maps
and a header that classifies them. The two halves declare their interfaces
explicitly so that mismatched pairs are caught before training and so each
half can be checkpointed and swapped independently.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .. import nn


@dataclass(frozen=True)
class FeatureSpec:
    """One emitted feature map: channel count and spatial scale divisor."""

    channels: int
    scale: int


@dataclass(frozen=True)
class BackboneSpec:
    architecture: str
    in_channels: int
    outputs: tuple[FeatureSpec, ...]


@dataclass(frozen=True)
class HeaderSpec:
    architecture: str
    inputs: tuple[FeatureSpec, ...]
    num_classes: int

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")


@dataclass(frozen=True)
class CompatibilityResult:
    ok: bool
    mismatches: tuple[str, ...] = ()


def check_compatibility(backbone: BackboneSpec, header: HeaderSpec) -> CompatibilityResult:
    """Compare the backbone's emitted interface with the header's expectation."""
    mismatches = []
    if len(backbone.outputs) != len(header.inputs):
        mismatches.append(
            f"feature map count {len(backbone.outputs)} != {len(header.inputs)}"
        )
    for i, (out, expected) in enumerate(zip(backbone.outputs, header.inputs)):
        if out.channels != expected.channels:
            mismatches.append(f"output {i}: channels {out.channels} != {expected.channels}")
        if out.scale != expected.scale:
            mismatches.append(f"output {i}: scale {out.scale} != {expected.scale}")
    return CompatibilityResult(ok=not mismatches, mismatches=tuple(mismatches))


class ModelPart(ABC):
    """A network half: layered structure with explicit forward/backward."""

    @property
    @abstractmethod
    def spec(self): ...

    @abstractmethod
    def forward(self, x: np.ndarray, training: bool) -> np.ndarray: ...

    @abstractmethod
    def backward(self, dout: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def iter_layers(self) -> Iterator[tuple[str, nn.Layer]]:
        """(name, layer) pairs in a stable construction order."""


def _collect(part: ModelPart, which: str) -> dict[str, np.ndarray]:
    out = {}
    for name, layer in part.iter_layers():
        for key, array in getattr(layer, which).items():
            out[f"{name}.{key}"] = array
    return out


class ComposedModel:
    """A backbone plus a header, trained and checkpointed as one model."""

    def __init__(self, backbone: ModelPart, header: ModelPart):
        self.backbone = backbone
        self.header = header

    @property
    def architecture(self) -> str:
        return f"{self.backbone.spec.architecture}+{self.header.spec.architecture}"

    @property
    def num_classes(self) -> int:
        return self.header.spec.num_classes

    def check(self) -> CompatibilityResult:
        return check_compatibility(self.backbone.spec, self.header.spec)

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        return self.header.forward(self.backbone.forward(x, training), training)

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        return self.backbone.backward(self.header.backward(dlogits))

    def _parts(self) -> tuple[tuple[str, ModelPart], ...]:
        return (("backbone", self.backbone), ("header", self.header))

    def named_parameters(self) -> dict[str, np.ndarray]:
        return {
            f"{part_name}.{name}": array
            for part_name, part in self._parts()
            for name, array in _collect(part, "params").items()
        }

    def named_grads(self) -> dict[str, np.ndarray]:
        return {
            f"{part_name}.{name}": array
            for part_name, part in self._parts()
            for name, array in _collect(part, "grads").items()
        }

    def named_state(self) -> dict[str, np.ndarray]:
        """Trainable parameters plus running buffers; the checkpoint payload."""
        state = {}
        for part_name, part in self._parts():
            for name, array in _collect(part, "params").items():
                state[f"{part_name}.{name}"] = array
            for name, array in _collect(part, "buffers").items():
                state[f"{part_name}.{name}"] = array
        return state

    @property
    def param_count(self) -> int:
        return sum(array.size for array in self.named_parameters().values())

    def verify_interface(self, probe_hw: tuple[int, int] = (32, 32)) -> bool:
        """Run a probe input through the backbone and compare with its spec."""
        probe = np.zeros(
            (1, self.backbone.spec.in_channels, *probe_hw), dtype=np.float32
        )
        features = self.backbone.forward(probe, training=False)
        declared = self.backbone.spec.outputs[0]
        actual_scale = probe_hw[0] // features.shape[2]
        return features.shape[1] == declared.channels and actual_scale == declared.scale
