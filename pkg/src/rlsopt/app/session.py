"""Scenario session: a Runner over the command modules."""

from __future__ import annotations

import logging
from pathlib import Path

from rlsopt.app.commands import COMMAND_MODULES
from rlsopt.app.config import build_run_config
from rlsopt.app.runner import Runner

lg = logging.getLogger(__name__)


def session(file: str | None = None, config_file: str | Path | None = None) -> bool:
    """Run a scenario file, or the interactive REPL when no file is given."""
    config = build_run_config("solve", config_file) if config_file else None
    runner = Runner(COMMAND_MODULES, config)
    if file:
        return runner.run_file(file)
    runner.run_interactive()
    return True
