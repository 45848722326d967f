"""Seed management for reproducible runs.

A single global seed is split into independent sub-seeds for weight
initialization, data shuffling, and sub-crop sampling by hashing the seed
together with a stream label (a keyed counter-mode split, so the streams are
not correlated). All numeric kernels are plain numpy; within one process
configuration the same seed therefore reproduces a run bit for bit.
"""

import hashlib
import random
from dataclasses import dataclass

import numpy as np

TRAIN_STREAM = 0
VAL_STREAM = 1


def derive_seed(seed: int, label: str) -> int:
    """Derive a 64-bit sub-seed for a named stream from the global seed."""
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class SeedState:
    """The global seed and its derived sub-seeds."""

    seed: int
    weight_init_seed: int
    shuffle_seed: int
    subcrop_seed: int

    @classmethod
    def from_seed(cls, seed: int) -> "SeedState":
        return cls(
            seed=seed,
            weight_init_seed=derive_seed(seed, "weight-init"),
            shuffle_seed=derive_seed(seed, "shuffle"),
            subcrop_seed=derive_seed(seed, "subcrop"),
        )


_active_state: SeedState | None = None
_init_rng: np.random.Generator | None = None


def seed_everything(seed: int) -> SeedState:
    """Seed every random source the framework uses.

    Sets the stdlib and legacy numpy global generators, and resets the
    weight-initialization stream that newly built models draw from.
    """
    global _active_state, _init_rng
    state = SeedState.from_seed(seed)
    random.seed(derive_seed(seed, "stdlib"))
    np.random.seed(derive_seed(seed, "numpy-global") % 2**32)
    _init_rng = np.random.default_rng(state.weight_init_seed)
    _active_state = state
    return state


def active_state() -> SeedState | None:
    """The SeedState of the last seed_everything call, if any."""
    return _active_state


def init_rng() -> np.random.Generator:
    """The weight-initialization stream (entropy-seeded if never seeded)."""
    global _init_rng
    if _init_rng is None:
        _init_rng = np.random.default_rng()
    return _init_rng


def stream_rng(base_seed: int, *tags: int) -> np.random.Generator:
    """A fresh deterministic generator for (stream, epoch)-style substreams."""
    return np.random.default_rng([base_seed, *tags])
