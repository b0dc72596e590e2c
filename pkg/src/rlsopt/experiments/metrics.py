"""Run metrics: f* estimates, critical index and first-hit counts."""

from __future__ import annotations

import logging
from typing import Iterable

from rlsopt.core.errors import SolverError
from rlsopt.core.levelset import LevelSequence, eval_P
from rlsopt.core.passes import count_data_pass, count_passes
from rlsopt.core.problem import ProblemInstance
from rlsopt.core.rls import SolverReport
from rlsopt.core.trace import TraceRecord

lg = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-5

__all__ = [
    "FEASIBILITY_TOL",
    "candidates_from_report",
    "count_data_pass",
    "count_passes",
    "critical_index",
    "estimate_fstar",
    "first_hit",
]


def estimate_fstar(candidates: Iterable[tuple[float, float]], tol: float = FEASIBILITY_TOL) -> float:
    """Smallest f among (f, g) pairs with g <= tol."""
    feasible = [f for f, g in candidates if g <= tol]
    if not feasible:
        raise SolverError("no feasible candidates")
    return min(feasible)


def candidates_from_report(report: SolverReport) -> list[tuple[float, float]]:
    """(f, g) of every restart candidate and every trace row of a run."""
    out = [(event.f, event.g) for event in report.restart_log]
    out.extend((record.f, record.g) for record in getattr(report.trace, "records", ()))
    out.append((report.f_best, report.g_best))
    return out


def critical_index(seq: LevelSequence, instance: ProblemInstance, f_star: float) -> int | None:
    """Smallest k with r_k < f* and alpha P(x_k0; r_k) >= f* - r_k, or None."""
    for k, (x, r) in enumerate(zip(seq.points, seq.levels)):
        if r < f_star and seq.alpha * eval_P(instance, x, r) >= f_star - r:
            return k
    return None


def first_hit(records: Iterable[TraceRecord], threshold: float) -> int | None:
    """Cumulative subroutine iterations at the first row with P(x; f*) <= threshold."""
    for record in records:
        if record.p_at_fstar is not None and record.p_at_fstar <= threshold:
            return record.fom_iters
    return None
