"""Run configuration shared by the CLI, config files and scenario runner."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Mapping

from rlsopt.core.errors import ConfigError, InputError
from rlsopt.core.fom import FomConfig, FomMode
from rlsopt.core.passes import PassConvention
from rlsopt.core.rls import SolverConfig

lg = logging.getLogger(__name__)

COMMANDS = ("lp-bench", "fairness", "solve")


def parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    low = str(value).strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _parse_floats(value: Any) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, str):
        return tuple(float(v) for v in value.split(",") if v.strip())
    return tuple(float(v) for v in value)


def _optional(parse: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def inner(value: Any) -> Any:
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
            return None
        return parse(value)
    return inner


def _opt(default: Any, parse: Callable[[Any], Any]) -> Any:
    return field(default=default, metadata={"parse": parse})


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs. Empty ``eps``/``rho`` mean per-command defaults."""

    command: str = _opt("solve", str)
    # solver
    alpha: float = _opt(0.5, float)
    bigB: float = _opt(0.95, float)
    eps: tuple[float, ...] = _opt((), _parse_floats)
    gamma: float = _opt(2.0, float)
    gamma_d: float = _opt(2.0, float)
    mode: str = _opt("sgd", str)
    budget: int = _opt(10_000, int)
    pass_budget: int | None = _opt(None, _optional(int))
    r_ini: float | None = _opt(None, _optional(float))
    num_levels: int | None = _opt(None, _optional(int))
    workers: int = _opt(1, int)
    early_exit: bool = _opt(False, parse_bool)
    # instances
    rho: tuple[float, ...] = _opt((), _parse_floats)
    lam: float = _opt(10.0, float)
    kappa: float = _opt(0.9, float)
    literal_hinge: bool = _opt(False, parse_bool)
    seed: int = _opt(42, int)
    split_seed: int = _opt(0, int)
    synthetic: bool = _opt(False, parse_bool)
    n_samples: int = _opt(200, int)
    n_features: int = _opt(5, int)
    warm_start_iters: int = _opt(40, int)
    reference_factor: int = _opt(0, int)
    tune: bool = _opt(False, parse_bool)
    # inputs
    problem: str | None = _opt(None, _optional(str))
    csv: str | None = _opt(None, _optional(str))
    label_col: str | None = _opt(None, _optional(str))
    group_col: str | None = _opt(None, _optional(str))
    label_map: str | None = _opt(None, _optional(str))
    group_map: str | None = _opt(None, _optional(str))
    # outputs
    out_trace: str | None = _opt(None, _optional(str))
    out_summary: str | None = _opt(None, _optional(str))

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not 0.0 < self.alpha < self.bigB < 1.0:
            raise ConfigError(f"need 0 < alpha < B < 1, got alpha={self.alpha}, B={self.bigB}")
        if any(not e > 0 for e in self.eps):
            raise ConfigError("every epsilon must be positive")
        if any(not r > 0 for r in self.rho):
            raise ConfigError("every rho must be positive")
        if self.budget < 0:
            raise ConfigError("budget must be non-negative")
        if self.mode not in {m.value for m in FomMode}:
            raise ConfigError(f"mode must be one of sgd, agm; got {self.mode!r}")
        if self.reference_factor < 0:
            raise ConfigError("reference_factor must be non-negative")

    def with_overrides(self, overrides: Mapping[str, Any]) -> RunConfig:
        return replace(self, **coerce_fields(overrides))

    def epsilon(self, default: float) -> float:
        return self.eps[0] if self.eps else default

    def solver_config(
        self,
        epsilon: float,
        f_star: float | None = None,
        convention: PassConvention = PassConvention.DATASET,
    ) -> SolverConfig:
        try:
            fom = FomConfig(alpha=self.alpha, B=self.bigB, gamma=self.gamma, gamma_d=self.gamma_d)
            return SolverConfig(
                epsilon=epsilon,
                budget=self.budget,
                mode=FomMode(self.mode),
                fom=fom,
                num_levels=self.num_levels,
                early_exit=self.early_exit,
                workers=self.workers,
                pass_convention=convention,
                pass_budget=self.pass_budget,
                f_star=f_star,
            )
        except InputError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["eps"] = list(self.eps)
        out["rho"] = list(self.rho)
        return out


_FIELDS = {f.name: f for f in fields(RunConfig)}
FIELD_NAMES = tuple(_FIELDS)


def coerce_fields(values: Mapping[str, Any]) -> dict[str, Any]:
    """Convert raw values (strings from flags or scenario files) to field types."""
    out: dict[str, Any] = {}
    for key, value in values.items():
        name = key.replace("-", "_")
        f = _FIELDS.get(name)
        if f is None:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            out[name] = f.metadata["parse"](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    return out


def load_config_file(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: expected a JSON object")
    return data


def build_run_config(
    command: str,
    config_file: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Defaults, then the config file, then flags."""
    values: dict[str, Any] = {}
    if config_file is not None:
        values.update(coerce_fields(load_config_file(config_file)))
    values.update(coerce_fields(overrides or {}))
    values["command"] = command
    config = RunConfig(**values)
    lg.debug("run config: %s", config)
    return config
