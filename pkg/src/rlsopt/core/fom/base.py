from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from rlsopt.core.errors import InputError
from rlsopt.core.passes import P_VALUE, OracleEvent
from rlsopt.core.problem import ProblemInstance, Vector, as_point, eval_max_constraint

lg = logging.getLogger(__name__)


class FomMode(str, Enum):
    SGD = "sgd"
    AGM = "agm"


@dataclass(frozen=True)
class FomConfig:
    """Constants shared by every subroutine instance of a run.

    ``gamma`` grows the line-search estimate per trial, ``gamma_d`` shrinks
    it after each accelerated step. ``smoothing_factor`` times ln(m + 1) is
    the numerator of the smoothing parameter chosen at every reset.
    """

    alpha: float = 0.5
    B: float = 0.95
    gamma: float = 2.0
    gamma_d: float = 2.0
    smoothing_factor: float = 3.0
    line_search_cap: int = 64
    p_floor: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < self.B < 1.0:
            raise InputError(f"need 0 < alpha < B < 1, got alpha={self.alpha}, B={self.B}")
        if not self.gamma > 1.0:
            raise InputError(f"gamma must exceed 1, got {self.gamma}")
        if not self.gamma_d > 1.0:
            raise InputError(f"gamma_d must exceed 1, got {self.gamma_d}")
        if not self.smoothing_factor > 0:
            raise InputError("smoothing_factor must be positive")
        if self.line_search_cap < 1:
            raise InputError("line_search_cap must be at least 1")
        if not self.p_floor > 0:
            raise InputError("p_floor must be positive")

    @property
    def progress_gap(self) -> float:
        """B - alpha, the fraction of P0 each restart epoch must remove."""
        return self.B - self.alpha

    def smoothing_numerator(self, num_constraints: int) -> float:
        return self.smoothing_factor * math.log(max(num_constraints, 1) + 1)


@dataclass
class FomState:
    """One restartable subroutine instance bound to a level parameter."""

    mode: FomMode
    r: float = 0.0
    x0: Vector = field(default_factory=lambda: np.zeros(0))
    x_cur: Vector = field(default_factory=lambda: np.zeros(0))
    t: int = 0
    P0: float = 0.0
    P_cur: float = 0.0
    best_x: Vector = field(default_factory=lambda: np.zeros(0))
    best_P: float = math.inf
    # (f0(x0), g(x0)); re-leveling the same x0 reuses them
    x0_values: tuple[float, float] | None = None
    # accelerated mode only
    sigma: float = 0.0
    L_hat: float = 0.0
    A: float = 0.0
    v: Vector = field(default_factory=lambda: np.zeros(0))
    grad_accum: Vector = field(default_factory=lambda: np.zeros(0))
    # lifetime counters, kept across resets
    iterations: int = 0
    resets: int = 0
    zero_steps: int = 0
    events: Counter = field(default_factory=Counter)

    def record(self, *events: OracleEvent) -> None:
        self.events.update(events)

    def track(self, x: Vector, P: float) -> None:
        """Advance to x and keep the best iterate of the epoch."""
        self.x_cur = x
        self.P_cur = P
        if P < self.best_P:
            self.best_x = x.copy()
            self.best_P = P


def fom_reset(
    state: FomState,
    instance: ProblemInstance,
    new_x0: Any,
    r: float,
    config: FomConfig,
) -> FomState:
    """Restart *state* from new_x0 on the subproblem at level r.

    Everything restart-scoped is recomputed from (new_x0, r); only lifetime
    counters survive. Moving an unchanged x0 to a new level costs no data
    pass.
    """
    x0 = as_point(new_x0, instance.dimension).copy()
    if state.x0_values is not None and np.array_equal(state.x0, x0):
        f0, g0 = state.x0_values
    else:
        f0 = instance.objective.value(x0)
        g0 = eval_max_constraint(instance, x0)[0]
        state.record(*P_VALUE)
        state.x0_values = (f0, g0)
    P0 = max(f0 - float(r), g0)
    state.r = float(r)
    state.x0 = x0
    state.x_cur = x0.copy()
    state.best_x = x0.copy()
    state.t = 0
    state.P0 = P0
    state.P_cur = P0
    state.best_P = P0
    state.resets += 1
    if state.mode is FomMode.AGM:
        scale = config.progress_gap * max(P0, config.p_floor)
        state.sigma = config.smoothing_numerator(instance.num_constraints) / scale
        state.L_hat = state.sigma
        state.A = 0.0
        state.v = x0.copy()
        state.grad_accum = np.zeros_like(x0)
    return state


def new_fom_state(
    mode: FomMode | str,
    instance: ProblemInstance,
    x0: Any,
    r: float,
    config: FomConfig,
) -> FomState:
    return fom_reset(FomState(mode=FomMode(mode)), instance, x0, r, config)


def check_restart_trigger(state: FomState, config: FomConfig) -> bool:
    """True iff P0 >= 0 and the epoch's best P is at most B * P0."""
    return state.P0 >= 0 and state.best_P <= config.B * state.P0
