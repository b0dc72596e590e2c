"""Restarting level set driver.

K+1 subroutine instances run in lockstep, one per level parameter r_k. When
an instance has removed enough of its starting value, it restarts from its
best point, and every instance above it is reset on a recomputed level
chain. The best epsilon-feasible point seen at a restart is the output.

An instance whose starting value P0 is at most epsilon sits idle until its
next reset: its x0 already is an epsilon-solution of its subproblem and was
offered to x_best when it became x0.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from rlsopt.core.errors import InputError, SolverError
from rlsopt.core.fom import (
    FomConfig,
    FomMode,
    FomState,
    check_restart_trigger,
    fom_iterate,
    fom_reset,
    new_fom_state,
    sgd_iterate,
)
from rlsopt.core.levelset import (
    LevelSequence,
    SurrogateBundle,
    compute_surrogates,
    eval_P,
    init_level_sequence,
)
from rlsopt.core.logging import SOLVER
from rlsopt.core.passes import OracleEvent, PassConvention, count_passes
from rlsopt.core.problem import ProblemInstance, Vector, as_point, eval_max_constraint
from rlsopt.core.trace import ROW_ITERATION, ROW_RESTART, MemorySink, TraceRecord, TraceSink

lg = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters; ``budget`` counts subroutine iterations over all instances.

    ``num_levels`` overrides the instance count K computed from a strictly
    feasible point. ``pass_budget`` additionally stops the run once the data
    passes reach it. ``f_star``, when known, fills the P(x; f*) trace column.
    """

    epsilon: float = 1.0
    budget: int = 10_000
    mode: FomMode = FomMode.SGD
    fom: FomConfig = field(default_factory=FomConfig)
    num_levels: int | None = None
    early_exit: bool = False
    workers: int = 1
    pass_convention: PassConvention = PassConvention.DATASET
    pass_budget: int | None = None
    f_star: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", FomMode(self.mode))
        object.__setattr__(self, "pass_convention", PassConvention(self.pass_convention))
        if not self.epsilon > 0 or not math.isfinite(self.epsilon):
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if self.budget < 0:
            raise InputError(f"budget must be non-negative, got {self.budget}")
        if self.num_levels is not None and self.num_levels < 0:
            raise InputError("num_levels must be non-negative")
        if self.workers < 1:
            raise InputError("workers must be at least 1")
        if self.pass_budget is not None and self.pass_budget < 0:
            raise InputError("pass_budget must be non-negative")

    @property
    def alpha(self) -> float:
        return self.fom.alpha

    @property
    def B(self) -> float:
        return self.fom.B


@dataclass(frozen=True)
class RestartEvent:
    outer_iter: int
    k_prime: int
    P0_before: float
    P0_after: float
    f: float
    g: float
    epoch: int
    improved: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "outer_iter": self.outer_iter,
            "k_prime": self.k_prime,
            "P0_before": self.P0_before,
            "P0_after": self.P0_after,
            "f": self.f,
            "g": self.g,
            "epoch": self.epoch,
            "improved": self.improved,
        }


RestartHook = Callable[["RlsState", RestartEvent], None]


@dataclass
class RlsState:
    instances: list[FomState]
    levels: list[float]
    x_best: Vector
    f_best: float
    g_best: float
    config: SolverConfig
    surrogates: SurrogateBundle | None = None
    outer_iter: int = 0
    fom_iters: int = 0
    restarts: int = 0
    trigger_events: int = 0
    last_k_prime: int | None = None
    epochs: list[int] = field(default_factory=list)
    restart_log: list[RestartEvent] = field(default_factory=list)
    events: Counter = field(default_factory=Counter)

    @property
    def K(self) -> int:
        return len(self.instances) - 1

    @property
    def level_sequence(self) -> LevelSequence:
        return LevelSequence(
            alpha=self.config.alpha,
            points=[s.x0 for s in self.instances],
            levels=list(self.levels),
        )

    @property
    def data_passes(self) -> int:
        total = Counter(self.events)
        for s in self.instances:
            total.update(s.events)
        return count_passes(total, self.config.pass_convention)


@dataclass
class SolverReport:
    x_best: Vector
    f_best: float
    g_best: float
    iterations: int
    outer_iterations: int
    data_passes: int
    restart_log: list[RestartEvent]
    trace: TraceSink
    K: int
    levels: list[float]
    surrogates: SurrogateBundle | None = None

    @property
    def restarts(self) -> int:
        return len(self.restart_log)

    def summary(self) -> dict[str, Any]:
        return {
            "f_best": self.f_best,
            "g_best": self.g_best,
            "iterations": self.iterations,
            "outer_iterations": self.outer_iterations,
            "data_passes": self.data_passes,
            "restarts": self.restarts,
            "K": self.K,
        }


def _candidate_values(state: RlsState, instance: ProblemInstance, x: Vector) -> tuple[float, float]:
    state.events.update((OracleEvent.OBJECTIVE_VALUE, OracleEvent.CONSTRAINT_VALUE))
    return instance.objective.value(x), eval_max_constraint(instance, x)[0]


def rls_init(
    instance: ProblemInstance,
    x_ini: Any,
    r_ini: float,
    config: SolverConfig,
) -> RlsState:
    """Build the level chain from x_ini and reset one instance per level."""
    x = as_point(x_ini, instance.dimension)
    meta = instance.metadata
    if meta.f_star is not None and not r_ini < meta.f_star:
        lg.warning("r_ini = %.6g is not below the known f* = %.6g", r_ini, meta.f_star)

    surrogates = None
    if config.num_levels is None:
        x_tilde = meta.strictly_feasible_point if meta.strictly_feasible_point is not None else x
        surrogates = compute_surrogates(instance, x_tilde, r_ini, config.alpha, config.epsilon)
        K = surrogates.K_tilde
    else:
        K = config.num_levels

    seq = init_level_sequence(instance, x, r_ini, config.alpha, K)
    instances = [
        new_fom_state(config.mode, instance, seq.points[k], seq.levels[k], config.fom)
        for k in range(K + 1)
    ]
    state = RlsState(
        instances=instances,
        levels=list(seq.levels),
        x_best=x.copy(),
        f_best=math.inf,
        g_best=math.inf,
        config=config,
        surrogates=surrogates,
        epochs=[0] * (K + 1),
    )
    f, g = _candidate_values(state, instance, x)
    state.g_best = g
    if g <= config.epsilon:
        state.f_best = f
    lg.log(SOLVER, "initialized K=%d instances, r_0=%.6g, r_K=%.6g", K, seq.levels[0], seq.levels[-1])
    return state


def execute_restart(
    state: RlsState,
    instance: ProblemInstance,
    k_prime: int,
) -> RestartEvent:
    """Restart instance k' from its best point and re-chain every level above it.

    r_{k'} and all instances below k' are left alone.
    """
    config = state.config
    alpha = config.alpha
    restarted = state.instances[k_prime]
    candidate = restarted.best_x.copy()
    P0_before = restarted.P0

    fom_reset(restarted, instance, candidate, state.levels[k_prime], config.fom)
    for k in range(k_prime + 1, state.K + 1):
        state.levels[k] = state.levels[k - 1] + alpha * state.instances[k - 1].P0
        below = state.instances[k]
        fom_reset(below, instance, below.x0, state.levels[k], config.fom)

    state.epochs[k_prime] += 1
    state.restarts += 1
    state.last_k_prime = k_prime

    f, g = _candidate_values(state, instance, candidate)
    improved = g <= config.epsilon and f < state.f_best
    if improved:
        state.x_best = candidate
        state.f_best = f
        state.g_best = g

    event = RestartEvent(
        outer_iter=state.outer_iter,
        k_prime=k_prime,
        P0_before=P0_before,
        P0_after=restarted.P0,
        f=f,
        g=g,
        epoch=state.epochs[k_prime],
        improved=improved,
    )
    state.restart_log.append(event)
    lg.log(
        SOLVER,
        "restart at k'=%d (outer %d): P0 %.6g -> %.6g, f=%.6g g=%.6g%s",
        k_prime, state.outer_iter, P0_before, restarted.P0, f, g, " *" if improved else "",
    )
    return event


def is_active(state: FomState, epsilon: float) -> bool:
    """Instances with P0 <= epsilon sit idle until re-chained."""
    return state.P0 > epsilon


def rls_outer_iteration(
    state: RlsState,
    instance: ProblemInstance,
    executor: Executor | None = None,
    on_restart: RestartHook | None = None,
) -> RlsState:
    """Advance every active instance once, then restart at the smallest triggered index."""
    config = state.config

    def advance(s: FomState) -> FomState:
        return fom_iterate(s, instance, s.r, config.fom)

    active = [k for k, s in enumerate(state.instances) if is_active(s, config.epsilon)]
    if executor is None:
        for k in active:
            advance(state.instances[k])
    else:
        # each task owns one state; the map is a barrier
        list(executor.map(advance, [state.instances[k] for k in active]))

    state.outer_iter += 1
    state.fom_iters += len(active)

    triggered = [k for k in active if check_restart_trigger(state.instances[k], config.fom)]
    state.trigger_events += len(triggered)
    if triggered:
        event = execute_restart(state, instance, triggered[0])
        if on_restart is not None:
            on_restart(state, event)
    return state


def make_trace_record(
    state: RlsState,
    instance: ProblemInstance,
    event: str = ROW_ITERATION,
) -> TraceRecord:
    f_star = state.config.f_star
    if f_star is None:
        f_star = instance.metadata.f_star
    x = state.x_best
    return TraceRecord(
        outer_iter=state.outer_iter,
        fom_iters=state.fom_iters,
        data_passes=state.data_passes,
        f=instance.objective.value(x),
        g=eval_max_constraint(instance, x)[0],
        p_at_fstar=None if f_star is None else eval_P(instance, x, f_star),
        restarts=state.restarts,
        last_kprime=state.last_k_prime,
        event=event,
    )


def _should_stop_early(state: RlsState) -> bool:
    eps = state.config.epsilon
    return state.g_best <= eps and state.instances[-1].best_P <= eps


def rls_run(
    instance: ProblemInstance,
    x_ini: Any,
    r_ini: float,
    config: SolverConfig,
    budget: int | None = None,
    sink: TraceSink | None = None,
    on_restart: RestartHook | None = None,
) -> SolverReport:
    """Run ceil(I / (K+1)) outer iterations and report the best feasible point."""
    budget = config.budget if budget is None else budget
    if budget < 0:
        raise InputError(f"budget must be non-negative, got {budget}")
    sink = MemorySink() if sink is None else sink

    state = rls_init(instance, x_ini, r_ini, config)
    n_outer = math.ceil(budget / (state.K + 1))
    lg.info("running %d outer iterations over %d instances", n_outer, state.K + 1)

    def restarted(st: RlsState, event: RestartEvent) -> None:
        sink.write(make_trace_record(st, instance, ROW_RESTART))
        if on_restart is not None:
            on_restart(st, event)

    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else nullcontext()
    with pool as executor:
        for _ in range(n_outer):
            if not any(is_active(s, config.epsilon) for s in state.instances):
                lg.info("all instances idle after %d outer iterations", state.outer_iter)
                break
            rls_outer_iteration(state, instance, executor, restarted)
            sink.write(make_trace_record(state, instance))
            if config.early_exit and _should_stop_early(state):
                lg.info("early exit after %d outer iterations", state.outer_iter)
                break
            if config.pass_budget is not None and state.data_passes >= config.pass_budget:
                lg.info("pass budget reached after %d outer iterations", state.outer_iter)
                break

    g_best = eval_max_constraint(instance, state.x_best)[0]
    report = SolverReport(
        x_best=state.x_best,
        f_best=instance.objective.value(state.x_best),
        g_best=g_best,
        iterations=state.fom_iters,
        outer_iterations=state.outer_iter,
        data_passes=state.data_passes,
        restart_log=state.restart_log,
        trace=sink,
        K=state.K,
        levels=list(state.levels),
        surrogates=state.surrogates,
    )
    lg.info(
        "done: f=%.8g g=%.3g after %d iterations, %d restarts",
        report.f_best, report.g_best, report.iterations, report.restarts,
    )
    return report


# -- reference solver with f* known ------------------------------------------


@dataclass
class ReferenceReport:
    x: Vector
    f: float
    g: float
    P: float
    levels: list[float]
    outer_iterations: int
    inner_iterations: int


def reference_level_set_run(
    instance: ProblemInstance,
    r0: float,
    alpha: float,
    epsilon: float,
    f_star: float,
    x0: Any = None,
    fom: FomConfig | None = None,
    inner_cap: int = 100_000,
    outer_cap: int = 10_000,
) -> ReferenceReport:
    """Plain level-set method using f* to stop each subproblem solve.

    Each subproblem is solved by restarting subgradient descent until
    ``alpha P(x_k; r_k) < f* - r_k``; the outer loop ends once
    ``P(x_k; r_k) <= epsilon``.
    """
    if not r0 < f_star:
        raise InputError(f"r0 = {r0} must be below f_star = {f_star}")
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    fom = FomConfig(alpha=alpha) if fom is None else fom
    if x0 is None:
        x0 = instance.metadata.strictly_feasible_point
    if x0 is None:
        x0 = np.zeros(instance.dimension)
    x = instance.feasible_set.project(as_point(x0, instance.dimension))

    r = float(r0)
    levels = [r]
    inner_total = 0
    for k in range(outer_cap):
        state = new_fom_state(FomMode.SGD, instance, x, r, fom)
        inner = 0
        while not alpha * state.best_P < f_star - r:
            if inner >= inner_cap:
                raise SolverError(f"subproblem at r={r:.6g} not solved within {inner_cap} iterations")
            sgd_iterate(state, instance, r, fom)
            inner += 1
            if check_restart_trigger(state, fom):
                fom_reset(state, instance, state.best_x, r, fom)
        inner_total += inner
        x = state.best_x
        P = state.best_P
        lg.log(SOLVER, "level %d: r=%.8g P=%.6g after %d inner iterations", k, r, P, inner)
        if P <= epsilon:
            return ReferenceReport(
                x=x,
                f=instance.objective.value(x),
                g=eval_max_constraint(instance, x)[0],
                P=P,
                levels=levels,
                outer_iterations=k + 1,
                inner_iterations=inner_total,
            )
        r = r + alpha * P
        levels.append(r)
    raise SolverError(f"level-set method did not reach epsilon within {outer_cap} outer iterations")
