"""Per-iteration trace rows and where they go."""

from __future__ import annotations

import csv
import logging
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import IO, Iterable, Protocol

lg = logging.getLogger(__name__)

TRACE_HEADER = (
    "outer_iter",
    "fom_iters",
    "data_passes",
    "f",
    "g",
    "p_at_fstar",
    "restarts",
    "last_kprime",
    "event",
)

ROW_ITERATION = "iteration"
ROW_RESTART = "restart"


@dataclass(frozen=True)
class TraceRecord:
    """Metrics of the best feasible solution.

    One ``iteration`` row follows each outer iteration; a ``restart`` row is
    written as soon as a restart has been executed, before the outer
    iteration's own row.
    """

    outer_iter: int
    fom_iters: int
    data_passes: int
    f: float
    g: float
    p_at_fstar: float | None
    restarts: int
    last_kprime: int | None
    event: str = ROW_ITERATION

    def as_row(self) -> list[str]:
        return [_cell(value) for value in astuple(self)]


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        # repr is the shortest string that reads back to the same double
        return repr(value)
    return str(value)


class TraceSink(Protocol):
    def write(self, record: TraceRecord) -> None: ...


class MemorySink:
    """Keeps records in a list."""

    def __init__(self) -> None:
        self.records: list[TraceRecord] = []

    def write(self, record: TraceRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def last(self) -> TraceRecord | None:
        return self.records[-1] if self.records else None


class CsvSink:
    """Streams records to a CSV file; the header is written on open."""

    def __init__(self, stream: IO[str]) -> None:
        self._stream = stream
        self._writer = csv.writer(stream, lineterminator="\n")
        self._writer.writerow(TRACE_HEADER)
        self.count = 0

    @classmethod
    def open(cls, path: str | Path) -> CsvSink:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        return cls(p.open("w", newline=""))

    def write(self, record: TraceRecord) -> None:
        self._writer.writerow(record.as_row())
        self.count += 1

    def close(self) -> None:
        self._stream.close()

    def __enter__(self) -> CsvSink:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_trace_csv(records: Iterable[TraceRecord], path: str | Path) -> int:
    """Write *records* to *path*; returns the number of rows."""
    with CsvSink.open(path) as sink:
        for record in records:
            sink.write(record)
        lg.debug("wrote %d trace rows to %s", sink.count, path)
        return sink.count
