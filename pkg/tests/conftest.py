import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from folioseg.data.synthetic import generate_corpus

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIGS_ROOT = REPO_ROOT / "configs"


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory) -> Path:
    """3 train / 1 val / 1 test pages of 64x64; enough for fast fit tests."""
    root = tmp_path_factory.mktemp("tiny_corpus")
    return generate_corpus(root, n_train=3, n_val=1, n_test=1, page_size=(64, 64), seed=7)


@pytest.fixture(scope="session")
def smoke_corpus(tmp_path_factory) -> Path:
    """The acceptance-scale synthetic corpus: 512x512 pages."""
    root = tmp_path_factory.mktemp("smoke_corpus")
    return generate_corpus(root, n_train=3, n_val=1, n_test=1, page_size=(512, 512), seed=11)


@pytest.fixture()
def configs_root() -> Path:
    return CONFIGS_ROOT


TINY_OVERRIDES = [
    "datamodule.crop_size=32",
    "datamodule.subcrop_size=24",
    "datamodule.test_crop_size=32",
    "model.base_channels=4",
    "model.depth=2",
    "trainer.max_epochs=2",
    "trainer.batch_size=8",
]
