"""Single experiment entry point.

Invocation mirrors the config system: the first token selects the experiment
file, every other token is an override::

    folioseg-run experiment=smoke.yaml datamodule.selection_train=2 +seed=7

Exit codes: 0 success, 2 configuration error, 3 data error, 4 training
error, 5 evaluation error.
"""

import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .config import (
    apply_overrides,
    instantiate,
    load_config_tree,
    parse_override,
    resolve_interpolations,
    snapshot,
    unresolved_tokens,
)
from .defaults import default_registry
from .engine.trainer import Trainer, TrainPlan
from .errors import ConfigError, DataError, EvaluationError, FoliosegError, TrainingError
from .loggers import MultiLogger
from .seeding import seed_everything

CONFIGS_ENV = "FOLIOSEG_CONFIGS_ROOT"
RUNS_ENV = "FOLIOSEG_RUNS_ROOT"
DEFAULT_SEED = 42

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRAINING = 4
EXIT_EVALUATION = 5

_EXIT_CODES = {
    ConfigError: EXIT_CONFIG,
    DataError: EXIT_DATA,
    TrainingError: EXIT_TRAINING,
    EvaluationError: EXIT_EVALUATION,
}


@dataclass(frozen=True)
class RunInvocation:
    experiment: str
    overrides: tuple[str, ...]
    configs_root: Path
    runs_root: Path


def parse_invocation(
    argv: list[str],
    configs_root: str | Path | None = None,
    runs_root: str | Path | None = None,
) -> RunInvocation:
    experiment = None
    overrides = []
    for token in argv:
        if token.startswith("experiment="):
            if experiment is not None:
                raise ConfigError("multiple experiment= tokens given")
            experiment = token.split("=", 1)[1]
        else:
            overrides.append(token)
    if not experiment:
        raise ConfigError("missing required token experiment=<file>")
    if configs_root is None:
        configs_root = os.environ.get(CONFIGS_ENV, "configs")
    if runs_root is None:
        runs_root = os.environ.get(RUNS_ENV, "runs")
    return RunInvocation(
        experiment=experiment,
        overrides=tuple(overrides),
        configs_root=Path(configs_root).resolve(),
        runs_root=Path(runs_root),
    )


def make_run_dir(runs_root: Path, experiment: str) -> Path:
    """A fresh timestamped directory; never reuses an existing one."""
    stem = Path(experiment).stem
    stamp = time.strftime("%Y-%m-%d_%H-%M-%S")
    suffix = 0
    while True:
        name = f"{stamp}_{stem}" if suffix == 0 else f"{stamp}_{stem}-{suffix}"
        candidate = runs_root / name
        try:
            candidate.mkdir(parents=True, exist_ok=False)
            return candidate
        except FileExistsError:
            suffix += 1


def execute(invocation: RunInvocation) -> int:
    registry = default_registry()

    experiment_path = invocation.configs_root / "experiment" / invocation.experiment
    if not experiment_path.is_file():
        raise ConfigError(f"experiment file not found: {experiment_path}")
    tree = load_config_tree(experiment_path, invocation.configs_root)
    directives = [parse_override(token) for token in invocation.overrides]
    tree = apply_overrides(tree, directives)

    seed = tree.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    seed_everything(seed)

    if "datamodule" not in tree:
        raise ConfigError("experiment config has no 'datamodule' group")
    if unresolved_tokens(tree["datamodule"]):
        raise ConfigError("the datamodule group cannot use interpolations")
    datamodule = instantiate(tree["datamodule"], registry, path="datamodule")

    providers = {"datamodule": datamodule.exports()}
    resolved = resolve_interpolations(tree, providers)

    run_dir = make_run_dir(invocation.runs_root, invocation.experiment)
    config_path = snapshot(resolved, run_dir)
    print(f"run directory: {run_dir}")

    for group in ("model", "loss", "optimizer", "metric", "task", "trainer"):
        if group not in resolved:
            raise ConfigError(f"experiment config has no {group!r} group")
    task_node = dict(resolved["task"])
    for group in ("model", "loss", "optimizer", "metric"):
        task_node[group] = resolved[group]
    task = instantiate(task_node, registry, path="task")
    callbacks = [
        instantiate(node, registry, path=f"callbacks[{i}]")
        for i, node in enumerate(resolved.get("callbacks", []))
    ]
    sinks = [
        instantiate(node, registry, path=f"logger[{i}]")
        for i, node in enumerate(resolved.get("logger", []))
    ]
    logger = MultiLogger(sinks) if sinks else None
    try:
        plan = TrainPlan(seed=seed, **resolved["trainer"])
    except TypeError as exc:
        raise ConfigError(f"bad trainer options: {exc}") from exc

    try:
        datamodule.setup()
    except FoliosegError:
        raise
    except OSError as exc:
        raise DataError(str(exc)) from exc

    trainer = Trainer(plan, run_dir=run_dir, callbacks=callbacks, logger=logger)
    manifest = trainer.fit(task, datamodule, config_path=str(config_path))

    try:
        outputs = trainer.test(task, datamodule, manifest=manifest)
    except FoliosegError as exc:
        # Any failure in the test stage counts as an evaluation failure.
        raise EvaluationError(str(exc)) from exc

    agg = outputs.report.aggregate
    print(f"test mIoU[%]: {agg.miou * 100:.2f}  macro F1[%]: {agg.macro_f1 * 100:.2f}")
    return EXIT_OK


def run_cli(
    argv: list[str],
    configs_root: str | Path | None = None,
    runs_root: str | Path | None = None,
) -> int:
    """Parse tokens, execute the run, map errors to exit codes."""
    try:
        invocation = parse_invocation(argv, configs_root, runs_root)
        return execute(invocation)
    except FoliosegError as exc:
        code = next(
            (code for kind, code in _EXIT_CODES.items() if isinstance(exc, kind)),
            EXIT_TRAINING,
        )
        print(f"error: {exc}", file=sys.stderr)
        return code


def main(argv: list[str] | None = None) -> int:
    return run_cli(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
