"""Fairness-constrained classification run."""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Any

from rlsopt.app.config import RunConfig
from rlsopt.app.output import emit_trace, write_summary
from rlsopt.core.errors import ConfigError, SolverError
from rlsopt.core.levelset import eval_P
from rlsopt.core.problem import ProblemInstance, Vector, eval_max_constraint
from rlsopt.core.rls import SolverConfig, rls_run
from rlsopt.core.trace import MemorySink
from rlsopt.experiments.fairness import (
    FairnessDataset,
    build_fairness_instance,
    generate_synthetic_fairness,
    load_fairness_csv,
    parse_value_map,
    tune_fairness,
    warm_start_feasible,
)
from rlsopt.experiments.metrics import candidates_from_report, estimate_fstar

lg = logging.getLogger(__name__)

FAIRNESS_EPSILON = 1e-3
FAIRNESS_R_INI = 0.0
TUNING_REFERENCE_FACTOR = 5


def load_dataset(config: RunConfig) -> FairnessDataset:
    if config.synthetic:
        return generate_synthetic_fairness(config.n_samples, config.n_features, config.seed)
    if not config.csv:
        raise ConfigError("fairness needs --csv FILE or --synthetic")
    for column, name in ((config.label_col, "label_col"), (config.group_col, "group_col")):
        if not column:
            raise ConfigError(f"fairness --csv needs {name}")
    if not config.label_map:
        raise ConfigError(f"label column {config.label_col!r} needs --label-map value=+1|-1,...")
    if not config.group_map:
        raise ConfigError(f"group column {config.group_col!r} needs --group-map value=M|F,...")
    return load_fairness_csv(
        config.csv,
        config.label_col,
        config.group_col,
        parse_value_map(config.label_map),
        parse_value_map(config.group_map),
    )


def strict_warm_start(instance: ProblemInstance, iterations: int) -> Vector:
    x_tilde = warm_start_feasible(instance, iterations)
    g = eval_max_constraint(instance, x_tilde)[0]
    if not g < 0:
        raise SolverError(
            f"warm start is not strictly feasible after {iterations} iterations "
            f"(g = {g:.3g}); try a larger --warm-start-iters"
        )
    lg.info("warm start: g = %.6g", g)
    return x_tilde


def _scaled(solver: SolverConfig, factor: int) -> SolverConfig:
    pass_budget = None if solver.pass_budget is None else solver.pass_budget * factor
    return replace(solver, budget=solver.budget * factor, pass_budget=pass_budget)


def reference_fstar(
    instance: ProblemInstance, x_ini: Vector, r_ini: float, solver: SolverConfig, factor: int
) -> float:
    """f* estimate from a run *factor* times longer than the main one."""
    report = rls_run(instance, x_ini, r_ini, _scaled(solver, factor))
    f_star = estimate_fstar(candidates_from_report(report))
    lg.info("reference run (%dx): f* ~ %.8g", factor, f_star)
    return f_star


def run_fairness(config: RunConfig) -> int:
    dataset = load_dataset(config)
    instance = build_fairness_instance(
        dataset,
        kappa=config.kappa,
        lam=config.lam,
        split_seed=config.split_seed,
        literal_hinge=config.literal_hinge,
    )
    x_ini = strict_warm_start(instance, config.warm_start_iters)
    r_ini = FAIRNESS_R_INI if config.r_ini is None else config.r_ini
    solver = config.solver_config(config.epsilon(FAIRNESS_EPSILON))

    f_star = None
    factor = config.reference_factor or (TUNING_REFERENCE_FACTOR if config.tune else 0)
    if factor:
        f_star = reference_fstar(instance, x_ini, r_ini, solver, factor)

    summary: dict[str, Any] = {"command": "fairness", "config": config.to_dict(), "f_star_estimate": f_star}
    if config.tune:
        results = tune_fairness(instance, x_ini, r_ini, f_star, solver)
        best = results[0]
        summary["tuning"] = [{"alpha": t.alpha, "B": t.B, "p_at_fstar": t.final_P} for t in results]
        lg.info("tuned: alpha=%g B=%g", best.alpha, best.B)
        solver = replace(solver, fom=replace(solver.fom, alpha=best.alpha, B=best.B))
    solver = replace(solver, f_star=f_star)

    trace = MemorySink()
    report = rls_run(instance, x_ini, r_ini, solver, sink=trace)
    if config.out_trace:
        emit_trace(trace, config.out_trace)

    summary.update(report.summary())
    if f_star is not None:
        summary["p_at_fstar"] = eval_P(instance, report.x_best, f_star)
    lg.info("fairness: f=%.8g g=%.3g after %d passes", report.f_best, report.g_best, report.data_passes)
    if config.out_summary:
        write_summary(summary, config.out_summary)
    return 0


def cmd_fairness(runner, **overrides: str) -> bool:
    """Fairness classification (synthetic=true or csv=FILE label_col=... group_col=...)."""
    return run_fairness(runner.config_for("fairness", overrides)) == 0
