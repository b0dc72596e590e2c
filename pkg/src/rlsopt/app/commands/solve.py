"""Solve a problem read from a JSON file."""

from __future__ import annotations

import logging

import numpy as np

from rlsopt.app.config import RunConfig
from rlsopt.app.output import emit_trace, write_summary
from rlsopt.core.errors import ConfigError
from rlsopt.core.levelset import eval_P
from rlsopt.core.problem import load_problem
from rlsopt.core.rls import rls_run
from rlsopt.core.trace import MemorySink

lg = logging.getLogger(__name__)

SOLVE_EPSILON = 1e-3
# r_ini = f* - offset when the problem file knows f*
SOLVE_R_OFFSET = 10.0


def run_solve(config: RunConfig) -> int:
    if not config.problem:
        raise ConfigError("solve needs --problem FILE")
    instance = load_problem(config.problem)
    meta = instance.metadata

    x_ini = meta.strictly_feasible_point
    if x_ini is None:
        x_ini = instance.feasible_set.project(np.zeros(instance.dimension))
    r_ini = config.r_ini
    if r_ini is None:
        if meta.f_star is None:
            raise ConfigError("solve needs --r-ini below f* (the problem file has no f_star)")
        r_ini = meta.f_star - SOLVE_R_OFFSET

    solver = config.solver_config(config.epsilon(SOLVE_EPSILON), f_star=meta.f_star)
    trace = MemorySink()
    report = rls_run(instance, x_ini, r_ini, solver, sink=trace)
    if config.out_trace:
        emit_trace(trace, config.out_trace)

    lg.info("x_best = %s", np.array2string(report.x_best, precision=8))
    if config.out_summary:
        summary = {"command": "solve", "problem": instance.name, **report.summary()}
        summary["x_best"] = report.x_best.tolist()
        if meta.f_star is not None:
            summary["p_at_fstar"] = eval_P(instance, report.x_best, meta.f_star)
        summary["restart_log"] = [event.to_dict() for event in report.restart_log]
        write_summary(summary, config.out_summary)
    return 0


def cmd_solve(runner, **overrides: str) -> bool:
    """Solve a JSON problem file (problem=FILE r_ini=... eps=...)."""
    return run_solve(runner.config_for("solve", overrides)) == 0
