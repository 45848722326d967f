"""Scalar logging with fan-out to multiple sinks.

Every record goes to every sink in emission order. A sink that fails keeps
the others working; its failure surfaces when the fan-out is flushed.
Values are written with full round-trip precision (repr), so a reread CSV
reproduces the logged floats exactly.
"""

import csv
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

from .errors import FoliosegError

CSV_HEADER = ("step", "epoch", "key", "value")


class LoggingError(FoliosegError):
    """One or more sinks failed to accept or flush records."""


@dataclass(frozen=True)
class LogRecord:
    step: int
    epoch: int
    key: str
    value: float


class LoggerSink(ABC):
    """One destination for log records."""

    sink_id: str = "sink"

    def prepare(self, run_dir: Path) -> None:
        """Bind the sink to a run directory before the first write."""

    @abstractmethod
    def write(self, record: LogRecord) -> None: ...

    def flush(self):
        return None


class MemorySink(LoggerSink):
    """Keeps records in memory; useful for tests and notebooks."""

    sink_id = "memory"

    def __init__(self):
        self.records: list[LogRecord] = []

    def write(self, record: LogRecord) -> None:
        self.records.append(record)


class CsvLogger(LoggerSink):
    """Appends records to ``metrics.csv`` in the run directory."""

    sink_id = "csv"

    def __init__(self, filename: str = "metrics.csv"):
        self.filename = filename
        self._run_dir: Path | None = None
        self._buffer: list[LogRecord] = []
        self._header_written = False

    def prepare(self, run_dir: Path) -> None:
        self._run_dir = Path(run_dir)

    @property
    def path(self) -> Path:
        if self._run_dir is None:
            raise LoggingError("csv sink was not prepared with a run directory")
        return self._run_dir / self.filename

    def write(self, record: LogRecord) -> None:
        self._buffer.append(record)

    def flush(self) -> Path:
        path = self.path
        mode = "a" if self._header_written else "w"
        with open(path, mode, newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            if not self._header_written:
                writer.writerow(CSV_HEADER)
                self._header_written = True
            for record in self._buffer:
                writer.writerow([record.step, record.epoch, record.key, repr(record.value)])
        self._buffer.clear()
        return path


class MultiLogger:
    """Fan-out: delivers each record to every sink, tracks per-sink failures."""

    def __init__(self, sinks: list[LoggerSink]):
        self.sinks = list(sinks)
        self._seen: set[tuple[int, str]] = set()
        self._failures: list[str] = []

    def prepare(self, run_dir: Path) -> None:
        for sink in self.sinks:
            sink.prepare(run_dir)

    def log_scalar(self, key: str, value: float, step: int, epoch: int) -> None:
        if (step, key) in self._seen:
            raise LoggingError(f"duplicate record for step={step} key={key!r}")
        self._seen.add((step, key))
        record = LogRecord(step=step, epoch=epoch, key=key, value=float(value))
        for sink in self.sinks:
            try:
                sink.write(record)
            except Exception as exc:
                self._failures.append(f"{sink.sink_id}: write failed: {exc}")

    def flush(self) -> list:
        """Flush all sinks; raises LoggingError afterwards if any sink failed."""
        results = []
        for sink in self.sinks:
            try:
                results.append(sink.flush())
            except Exception as exc:
                self._failures.append(f"{sink.sink_id}: flush failed: {exc}")
        if self._failures:
            failures, self._failures = self._failures, []
            raise LoggingError("; ".join(failures))
        return results


def csv_flush(logger: MultiLogger, run_dir: Path) -> Path:
    """Flush the fan-out and return the CSV path inside ``run_dir``."""
    logger.flush()
    for sink in logger.sinks:
        if isinstance(sink, CsvLogger) and sink.path.parent == Path(run_dir):
            return sink.path
    raise LoggingError(f"no csv sink bound to {run_dir}")
