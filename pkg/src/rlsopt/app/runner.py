"""Scenario runner over a session RunConfig.

A scenario is a text file of ``command key=value ...`` lines. ``set`` edits
the session config for the lines below it; an experiment command runs on the
session config plus its own keys, which do not stick.
"""

from __future__ import annotations

import logging
import shlex
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from types import ModuleType
from typing import Callable, Mapping

try:
    import readline
except ImportError:
    readline = None  # type: ignore[assignment]

from rlsopt.app.config import FIELD_NAMES, RunConfig, parse_bool
from rlsopt.core.errors import ConfigError, InputError, SolverError

lg = logging.getLogger(__name__)

# session keys that are not RunConfig fields
RUNNER_KEYS = ("log", "stop_on_error")
END_WORDS = frozenset({"quit", "exit"})
CONFIG_KEYS = tuple(name for name in FIELD_NAMES if name != "command")

Command = Callable[..., bool]


@dataclass(frozen=True)
class ScenarioLine:
    command: str
    args: dict[str, str] = field(default_factory=dict)
    lineno: int = 0


def parse_command(text: str, lineno: int = 0) -> ScenarioLine | None:
    """``lp-bench rho=1,5 early_exit`` -> ScenarioLine('lp-bench', {...}).

    None for blank and comment lines. A bare key reads as ``key=true``;
    values stay strings until RunConfig coerces them.
    """
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    name, *tokens = shlex.split(body)
    args = {}
    for token in tokens:
        key, sep, value = token.partition("=")
        args[key] = value if sep else "true"
    return ScenarioLine(name, args, lineno)


def _command_table(modules: list[ModuleType]) -> dict[str, Callable[..., bool]]:
    """``cmd_lp_bench`` in a module becomes the ``lp-bench`` command."""
    table = {}
    for module in modules:
        for attr, func in vars(module).items():
            if attr.startswith("cmd_") and callable(func):
                table[attr[4:].replace("_", "-")] = func
    return table


class Runner:
    """Session config plus the experiment commands that read it."""

    def __init__(self, command_modules: list[ModuleType], config: RunConfig | None = None) -> None:
        self.config = config or RunConfig()
        self.stop_on_error = True
        self._commands: dict[str, Command] = {
            name: partial(func, self) for name, func in _command_table(command_modules).items()
        }
        self._commands.update(help=self.cmd_help, show=self.cmd_show, set=self.cmd_set)
        self._completions: list[str] = []

    @property
    def commands(self) -> list[str]:
        return sorted(self._commands)

    @property
    def settings(self) -> tuple[str, ...]:
        return RUNNER_KEYS + CONFIG_KEYS

    def config_for(self, command: str, overrides: Mapping[str, str]) -> RunConfig:
        """Session config with per-command overrides; the session itself is unchanged."""
        return self.config.with_overrides({**overrides, "command": command})

    # -- built-in commands ----------------------------------------------------

    def cmd_help(self) -> bool:
        """List commands."""
        lines = [f"  {name:12s} {_summary(self._commands[name])}" for name in self.commands]
        lg.info("commands:\n%s", "\n".join(lines))
        return True

    def cmd_show(self) -> bool:
        """Show the session config."""
        rows = [f"  {key:18s} {value}" for key, value in self.config.to_dict().items() if key != "command"]
        rows.append(f"  {'stop_on_error':18s} {self.stop_on_error}")
        lg.info("session:\n%s", "\n".join(rows))
        return True

    def cmd_set(self, **values: str) -> bool:
        """Change session settings (alpha=0.3 budget=500 log=SOLVER ...).

        The line is applied whole or not at all.
        """
        unknown = sorted(set(values) - set(self.settings))
        if unknown:
            lg.error("set: unknown key(s) %s", ", ".join(unknown))
            return False
        fields = {k: v for k, v in values.items() if k not in RUNNER_KEYS}
        try:
            config = self.config.with_overrides(fields)
            level = _log_level(values["log"]) if "log" in values else None
            stop = parse_bool(values["stop_on_error"]) if "stop_on_error" in values else None
        except (ConfigError, ValueError) as exc:
            lg.error("set: %s", exc)
            return False
        self.config = config
        if level is not None:
            logging.getLogger().setLevel(level)
        if stop is not None:
            self.stop_on_error = stop
        lg.debug("set %s", " ".join(f"{k}={v}" for k, v in values.items()))
        return True

    # -- execution ------------------------------------------------------------

    def run_line(self, line: ScenarioLine) -> bool:
        command = self._commands.get(line.command)
        if command is None:
            lg.error("line %d: unknown command %r", line.lineno, line.command)
            return False
        try:
            return bool(command(**line.args))
        except TypeError as exc:
            lg.error("line %d: %s takes no such argument (%s)", line.lineno, line.command, exc)
        except InputError as exc:
            lg.error("line %d: %s: %s", line.lineno, line.command, exc)
        except (SolverError, OSError) as exc:
            lg.error("line %d: %s failed: %s", line.lineno, line.command, exc)
        return False

    def execute(self, text: str) -> bool:
        """Run one command line; blank and comment lines succeed."""
        line = parse_command(text)
        return True if line is None else self.run_line(line)

    def run_file(self, path: str | Path) -> bool:
        """Run a scenario up to its end or a quit line.

        False when a line fails while stop_on_error is on; the rest is skipped.
        """
        for lineno, text in enumerate(Path(path).read_text().splitlines(), 1):
            line = parse_command(text, lineno)
            if line is None:
                continue
            if line.command in END_WORDS:
                break
            if not self.run_line(line) and self.stop_on_error:
                lg.error("scenario stopped at line %d", lineno)
                return False
        return True

    # -- interactive ----------------------------------------------------------

    def _complete(self, text: str, state: int) -> str | None:
        """Command names first, then ``key=`` for the keys the command reads."""
        if state == 0:
            buffer = readline.get_line_buffer()
            words = buffer.split()
            if not words or (len(words) == 1 and not buffer.endswith(" ")):
                options = [*self.commands, *sorted(END_WORDS)]
            else:
                keys = self.settings if words[0] == "set" else CONFIG_KEYS
                given = {w.partition("=")[0] for w in words[1:]}
                options = [f"{k}=" for k in keys if k not in given]
            self._completions = [o for o in options if o.startswith(text)]
        return self._completions[state] if state < len(self._completions) else None

    def run_interactive(self, prompt: str = "rlsopt> ") -> None:
        if readline is not None:
            readline.set_completer(self._complete)
            readline.set_completer_delims(" ")
            readline.parse_and_bind("tab: complete")
        lg.info("type 'help' for commands, 'quit' to leave")
        while True:
            try:
                text = input(prompt)
            except (EOFError, KeyboardInterrupt):
                print()
                return
            line = parse_command(text)
            if line is None:
                continue
            if line.command in END_WORDS:
                return
            self.run_line(line)


def _log_level(name: str) -> int:
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        raise ConfigError(f"unknown log level {name!r}")
    return level


def _summary(command: Command) -> str:
    doc = getattr(command, "func", command).__doc__ or ""
    return doc.strip().split("\n", 1)[0]
