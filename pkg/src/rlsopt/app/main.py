"""Command dispatch and exit codes."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable, Mapping

from rlsopt.app.commands.bench import run_lp_bench
from rlsopt.app.commands.fairness import run_fairness
from rlsopt.app.commands.solve import run_solve
from rlsopt.app.config import RunConfig, build_run_config
from rlsopt.app.session import session
from rlsopt.core.errors import InputError, SolverError

lg = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_SOLVER = 3

_COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "lp-bench": run_lp_bench,
    "fairness": run_fairness,
    "solve": run_solve,
}


def main(
    command: str,
    config_file: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> int:
    """Run one command; 2 for bad input or configuration, 3 for solver or I/O failure."""
    lg.debug("rlsopt %s", command)
    try:
        config = build_run_config(command, config_file, overrides)
        return _COMMANDS[command](config)
    except InputError as exc:
        lg.error("%s: %s", command, exc)
        return EXIT_INPUT
    except (SolverError, OSError) as exc:
        lg.error("%s failed: %s", command, exc)
        return EXIT_SOLVER


def run_scenario(file: str | None, config_file: str | Path | None = None) -> int:
    try:
        return EXIT_OK if session(file, config_file) else EXIT_FAILED
    except InputError as exc:
        lg.error("%s", exc)
        return EXIT_INPUT
