"""Ring-LP sweep over rho and epsilon."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np

from rlsopt.app.config import RunConfig
from rlsopt.app.output import emit_trace, trace_filename, write_summary
from rlsopt.core.levelset import eval_P
from rlsopt.core.passes import PassConvention
from rlsopt.core.problem import ProblemInstance
from rlsopt.core.rls import SolverReport, rls_run
from rlsopt.core.trace import MemorySink
from rlsopt.experiments.metrics import first_hit
from rlsopt.experiments.ringlp import RING_F_STAR, build_ring_lp

lg = logging.getLogger(__name__)

LP_RHOS = (1.0, 2.0, 3.0, 4.0, 5.0)
LP_EPSILONS = (4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.1, 0.0625, 0.01)
LP_R_OFFSET = 10.0
FIRST_HIT_THRESHOLD = 0.25
DEFAULT_TRACE_DIR = "traces"


def _cell_summary(
    instance: ProblemInstance, rho: float, eps: float, report: SolverReport, trace: MemorySink
) -> dict[str, Any]:
    return {
        "rho": rho,
        "eps": eps,
        **report.summary(),
        "p_at_fstar": eval_P(instance, report.x_best, RING_F_STAR),
        "first_hit_iterations": first_hit(trace, FIRST_HIT_THRESHOLD),
    }


def run_lp_bench(config: RunConfig) -> int:
    """Run every (rho, eps) cell; one trace per cell plus a summary table."""
    rhos = config.rho or LP_RHOS
    epsilons = config.eps or LP_EPSILONS
    r_ini = RING_F_STAR - LP_R_OFFSET if config.r_ini is None else config.r_ini
    out_dir = Path(config.out_trace or DEFAULT_TRACE_DIR)

    cells = []
    for rho in rhos:
        instance = build_ring_lp(rho)
        for eps in epsilons:
            solver = config.solver_config(eps, f_star=RING_F_STAR, convention=PassConvention.UPDATE)
            trace = MemorySink()
            report = rls_run(instance, np.zeros(2), r_ini, solver, sink=trace)
            emit_trace(trace, out_dir / trace_filename(rho, eps))
            cell = _cell_summary(instance, rho, eps, report, trace)
            cells.append(cell)
            lg.info(
                "rho=%-4g eps=%-7g K=%-4d P(x;f*)=%-12.6g f=%-12.8g g=%-10.3g first_hit=%s",
                rho, eps, report.K, cell["p_at_fstar"], report.f_best, report.g_best,
                cell["first_hit_iterations"],
            )

    if config.out_summary:
        write_summary({"command": "lp-bench", "config": config.to_dict(), "cells": cells}, config.out_summary)
    return 0


def cmd_lp_bench(runner, **overrides: str) -> bool:
    """Ring-LP sweep (rho=..., eps=..., out_trace=DIR, out_summary=FILE)."""
    return run_lp_bench(runner.config_for("lp-bench", overrides)) == 0
