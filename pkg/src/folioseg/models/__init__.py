"""Model zoo: backbone/header composition, U-Net, checkpointing."""

from .checkpoint import FORMAT_VERSION, PARTS, load_part, save_part
from .compose import (
    BackboneSpec,
    CompatibilityResult,
    ComposedModel,
    FeatureSpec,
    HeaderSpec,
    ModelPart,
    check_compatibility,
)
from .unet import ConvHeader, UNet, UNetBackbone, build_unet

__all__ = [
    "BackboneSpec",
    "CompatibilityResult",
    "ComposedModel",
    "ConvHeader",
    "FORMAT_VERSION",
    "FeatureSpec",
    "HeaderSpec",
    "ModelPart",
    "PARTS",
    "UNet",
    "UNetBackbone",
    "build_unet",
    "check_compatibility",
    "load_part",
    "save_part",
]
