"""Minimal numpy network stack: layers, losses, optimizers."""

from .layers import BatchNorm2d, Concat, Conv2d, ConvTranspose2d, Layer, MaxPool2d, ReLU, he_uniform
from .losses import CrossEntropyLoss, softmax
from .optim import SGD, Adam, Optimizer

__all__ = [
    "Adam",
    "BatchNorm2d",
    "Concat",
    "Conv2d",
    "ConvTranspose2d",
    "CrossEntropyLoss",
    "Layer",
    "MaxPool2d",
    "Optimizer",
    "ReLU",
    "SGD",
    "he_uniform",
    "softmax",
]
