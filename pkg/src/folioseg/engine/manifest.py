"""The run manifest: everything needed to rerun an experiment."""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

MANIFEST_NAME = "manifest.json"


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_miou: float


@dataclass
class RunManifest:
    """Seed, config snapshot, per-epoch metrics, checkpoints, test outputs."""

    run_dir: str
    seed: int
    config_path: str | None = None
    epochs: list[EpochRecord] = field(default_factory=list)
    checkpoints: dict[str, str] = field(default_factory=dict)
    best_epoch: int | None = None
    best_val_miou: float | None = None
    test: dict | None = None

    def save(self, path: str | Path | None = None) -> Path:
        if path is None:
            path = Path(self.run_dir) / MANIFEST_NAME
        path = Path(path)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        data["epochs"] = [EpochRecord(**entry) for entry in data.get("epochs", [])]
        return cls(**data)
