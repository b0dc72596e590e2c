"""Trace and summary files."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable

from rlsopt.core.trace import TraceRecord, write_trace_csv

lg = logging.getLogger(__name__)


def emit_trace(records: Iterable[TraceRecord], path: str | Path) -> int:
    """CSV with the fixed trace header; an empty run gives a header-only file."""
    count = write_trace_csv(records, path)
    lg.info("trace: %s (%d rows)", path, count)
    return count


def trace_filename(rho: float, eps: float) -> str:
    return f"trace_rho{rho:g}_eps{eps:g}.csv"


def write_summary(summary: dict[str, Any], path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    lg.info("summary: %s", p)
