"""Accelerated gradient method on the smoothed level-set function.

Each iteration runs an accelerated projected gradient step whose local
Lipschitz estimate ``L_hat`` is found by a growing line search, then
updates the dual-averaging point ``v`` from the weighted gradient sum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from rlsopt.core.errors import InputError, LineSearchError
from rlsopt.core.fom.base import FomConfig, FomMode, FomState
from rlsopt.core.levelset import eval_P, grad_P_sigma
from rlsopt.core.logging import TRACE
from rlsopt.core.passes import P_VALUE, OracleEvent
from rlsopt.core.problem import ProblemInstance, Vector

lg = logging.getLogger(__name__)

GradientOracle = Callable[[Vector], Vector]
Projection = Callable[[Vector], Vector]


@dataclass(frozen=True)
class ApgStep:
    x_hat: Vector
    L_hat: float
    a: float
    y: Vector
    trials: int


def apg_root(L_hat: float, A: float) -> float:
    """Positive root of a^2 / (A + a) = 2 / L_hat."""
    inv = 1.0 / L_hat
    return inv + math.sqrt(inv * inv + 2.0 * A * inv)


def apg_exit_holds(L_hat: float, x: Vector, y: Vector, grad_x: Vector, grad_y: Vector) -> bool:
    diff = grad_x - grad_y
    return L_hat * float(diff @ (x - y)) >= float(diff @ diff)


def apg_step(
    grad: GradientOracle,
    x: Vector,
    v: Vector,
    L_hat: float,
    A: float,
    gamma: float,
    project: Projection,
    cap: int = 64,
) -> ApgStep:
    """Accelerated projected gradient step with a growing line search.

    The exit test compares gradients at the incoming point x and at the
    extrapolated point y. Raises LineSearchError after *cap* growths.
    """
    grad_x = grad(x)
    L = L_hat / gamma
    for trial in range(1, cap + 1):
        L *= gamma
        a = apg_root(L, A)
        y = (A * x + a * v) / (A + a)
        grad_y = grad(y)
        x_hat = project(y - grad_y / L)
        if apg_exit_holds(L, x, y, grad_x, grad_y):
            return ApgStep(x_hat=x_hat, L_hat=L, a=a, y=y, trials=trial)
    raise LineSearchError(L, cap)


def agm_iterate(
    state: FomState,
    instance: ProblemInstance,
    r: float,
    config: FomConfig,
) -> FomState:
    if state.mode is not FomMode.AGM:
        raise InputError(f"agm_iterate called on a {state.mode.value} state")

    sigma = state.sigma

    def grad(point: Vector) -> Vector:
        state.record(OracleEvent.SMOOTHED_VALUE_GRADIENT)
        return grad_P_sigma(instance, point, r, sigma)

    project = instance.feasible_set.project
    step = apg_step(
        grad, state.x_cur, state.v, state.L_hat, state.A,
        config.gamma, project, config.line_search_cap,
    )
    x_new = step.x_hat
    state.grad_accum = state.grad_accum + step.a * grad(x_new)
    state.v = project(state.x0 - state.grad_accum)
    state.A += step.a
    state.L_hat = step.L_hat / config.gamma_d
    lg.log(TRACE, "r=%.6g t=%d L_hat=%.6g a=%.6g trials=%d", r, state.t, step.L_hat, step.a, step.trials)

    # best tracking is in P, not in the smoothed function
    P_new = eval_P(instance, x_new, r)
    state.record(*P_VALUE, OracleEvent.UPDATE)
    state.t += 1
    state.iterations += 1
    state.track(np.asarray(x_new, dtype=np.float64), P_new)
    return state
