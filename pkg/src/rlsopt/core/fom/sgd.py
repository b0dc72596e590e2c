"""Projected subgradient descent on P(.; r)."""

from __future__ import annotations

import logging

from rlsopt.core.errors import InputError
from rlsopt.core.fom.base import FomConfig, FomMode, FomState
from rlsopt.core.levelset import eval_P, subgrad_P
from rlsopt.core.logging import TRACE
from rlsopt.core.passes import P_SUBGRADIENT, P_VALUE, OracleEvent
from rlsopt.core.problem import ProblemInstance

lg = logging.getLogger(__name__)


def sgd_step_size(state: FomState, config: FomConfig, norm2: float) -> float:
    """(B - alpha) * P0 / ||xi||^2.

    The driver only advances instances with P0 > epsilon, so the step is
    positive there.
    """
    return config.progress_gap * state.P0 / norm2


def sgd_iterate(
    state: FomState,
    instance: ProblemInstance,
    r: float,
    config: FomConfig,
) -> FomState:
    if state.mode is not FomMode.SGD:
        raise InputError(f"sgd_iterate called on a {state.mode.value} state")

    xi = subgrad_P(instance, state.x_cur, r)
    state.record(*P_SUBGRADIENT)
    norm2 = float(xi @ xi)
    if norm2 == 0.0:
        # x_cur minimizes P(.; r)
        x_new = state.x_cur.copy()
        state.zero_steps += 1
        lg.log(TRACE, "r=%.6g t=%d zero subgradient", r, state.t)
    else:
        eta = sgd_step_size(state, config, norm2)
        x_new = instance.feasible_set.project(state.x_cur - eta * xi)
        lg.log(TRACE, "r=%.6g t=%d eta=%.6g", r, state.t, eta)

    P_new = eval_P(instance, x_new, r)
    state.record(*P_VALUE, OracleEvent.UPDATE)
    state.t += 1
    state.iterations += 1
    state.track(x_new, P_new)
    return state
