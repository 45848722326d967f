"""U-Net: doubling-channel encoder/decoder with skip concatenations.

The backbone is the full encoder plus decoder trunk, emitting
``base_channels`` feature maps at input resolution; the header is the final
1x1 projection to class logits. With the defaults (base 64, depth 5) the
composed model has 31,043,976 parameters.
"""

from typing import Iterator

import numpy as np

from .. import nn
from ..seeding import init_rng
from .compose import BackboneSpec, ComposedModel, FeatureSpec, HeaderSpec, ModelPart


class _DoubleConv:
    """Two padded 3x3 convolutions, each followed by batch norm and ReLU."""

    def __init__(self, in_channels, out_channels, rng, dtype):
        self.conv1 = nn.Conv2d(in_channels, out_channels, rng=rng, dtype=dtype)
        self.bn1 = nn.BatchNorm2d(out_channels, dtype=dtype)
        self.relu1 = nn.ReLU()
        self.conv2 = nn.Conv2d(out_channels, out_channels, rng=rng, dtype=dtype)
        self.bn2 = nn.BatchNorm2d(out_channels, dtype=dtype)
        self.relu2 = nn.ReLU()
        self._chain = [self.conv1, self.bn1, self.relu1, self.conv2, self.bn2, self.relu2]

    def forward(self, x, training):
        for layer in self._chain:
            x = layer.forward(x, training)
        return x

    def backward(self, dout):
        for layer in reversed(self._chain):
            dout = layer.backward(dout)
        return dout

    def iter_layers(self, prefix: str) -> Iterator[tuple[str, nn.Layer]]:
        yield f"{prefix}.conv1", self.conv1
        yield f"{prefix}.bn1", self.bn1
        yield f"{prefix}.conv2", self.conv2
        yield f"{prefix}.bn2", self.bn2


class UNetBackbone(ModelPart):
    """Encoder, bottleneck, and decoder trunk with skip connections."""

    def __init__(self, in_channels: int, base_channels: int, depth: int,
                 rng: np.random.Generator, dtype=np.float32):
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        if base_channels < 1:
            raise ValueError(f"base_channels must be >= 1, got {base_channels}")
        self.in_channels = in_channels
        self.base_channels = base_channels
        self.depth = depth

        widths = [base_channels * 2**i for i in range(depth)]
        self.enc_blocks = []
        previous = in_channels
        for width in widths:
            self.enc_blocks.append(_DoubleConv(previous, width, rng, dtype))
            previous = width
        self.pools = [nn.MaxPool2d() for _ in range(depth - 1)]
        self.ups = [
            nn.ConvTranspose2d(widths[i + 1], widths[i], rng=rng, dtype=dtype)
            for i in range(depth - 1)
        ]
        self.concats = [nn.Concat() for _ in range(depth - 1)]
        self.dec_blocks = [
            _DoubleConv(widths[i + 1], widths[i], rng, dtype) for i in range(depth - 1)
        ]

    @property
    def downsample_factor(self) -> int:
        return 2 ** (self.depth - 1)

    @property
    def spec(self) -> BackboneSpec:
        return BackboneSpec(
            architecture=f"unet/in{self.in_channels}-b{self.base_channels}-d{self.depth}",
            in_channels=self.in_channels,
            outputs=(FeatureSpec(channels=self.base_channels, scale=1),),
        )

    def forward(self, x, training):
        factor = self.downsample_factor
        if x.shape[2] % factor or x.shape[3] % factor:
            raise ValueError(
                f"input {x.shape[2]}x{x.shape[3]} not divisible by the "
                f"downsampling factor {factor}"
            )
        skips = []
        h = x
        for i in range(self.depth - 1):
            h = self.enc_blocks[i].forward(h, training)
            skips.append(h)
            h = self.pools[i].forward(h, training)
        h = self.enc_blocks[-1].forward(h, training)
        for i in reversed(range(self.depth - 1)):
            up = self.ups[i].forward(h, training)
            h = self.concats[i].forward_pair(skips[i], up)
            h = self.dec_blocks[i].forward(h, training)
        return h

    def backward(self, dout):
        dskips = [None] * (self.depth - 1)
        d = dout
        for i in range(self.depth - 1):
            d = self.dec_blocks[i].backward(d)
            dskip, dup = self.concats[i].backward(d)
            dskips[i] = dskip
            d = self.ups[i].backward(dup)
        d = self.enc_blocks[-1].backward(d)
        for i in reversed(range(self.depth - 1)):
            d = self.pools[i].backward(d)
            d = d + dskips[i]
            d = self.enc_blocks[i].backward(d)
        return d

    def iter_layers(self):
        for i, block in enumerate(self.enc_blocks):
            yield from block.iter_layers(f"enc{i}")
        for i, up in enumerate(self.ups):
            yield f"up{i}", up
        for i, block in enumerate(self.dec_blocks):
            yield from block.iter_layers(f"dec{i}")


class ConvHeader(ModelPart):
    """1x1 convolution projecting trunk features to class logits."""

    def __init__(self, in_channels: int, num_classes: int,
                 rng: np.random.Generator, dtype=np.float32):
        if num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {num_classes}")
        self.in_channels = in_channels
        self.num_classes = num_classes
        self.conv = nn.Conv2d(
            in_channels, num_classes, kernel_size=1, padding=0, rng=rng, dtype=dtype
        )

    @property
    def spec(self) -> HeaderSpec:
        return HeaderSpec(
            architecture=f"conv1x1/in{self.in_channels}-c{self.num_classes}",
            inputs=(FeatureSpec(channels=self.in_channels, scale=1),),
            num_classes=self.num_classes,
        )

    def forward(self, x, training):
        return self.conv.forward(x, training)

    def backward(self, dout):
        return self.conv.backward(dout)

    def iter_layers(self):
        yield "conv", self.conv


class UNet(ComposedModel):
    def __init__(self, num_classes: int, base_channels: int = 64, depth: int = 5,
                 in_channels: int = 3, seed: int | None = None, dtype=np.float32):
        rng = np.random.default_rng(seed) if seed is not None else init_rng()
        backbone = UNetBackbone(in_channels, base_channels, depth, rng, dtype)
        header = ConvHeader(base_channels, num_classes, rng, dtype)
        super().__init__(backbone, header)


def build_unet(num_classes: int, base_channels: int = 64, depth: int = 5,
               in_channels: int = 3, seed: int | None = None, dtype=np.float32) -> UNet:
    """Construct a U-Net; weights come from ``seed`` or the global init stream."""
    return UNet(num_classes, base_channels, depth, in_channels, seed, dtype)
