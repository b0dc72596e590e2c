"""Restartable first-order subroutines for the level-set subproblem."""

from __future__ import annotations

from rlsopt.core.fom.agm import ApgStep, agm_iterate, apg_root, apg_step
from rlsopt.core.fom.base import (
    FomConfig,
    FomMode,
    FomState,
    check_restart_trigger,
    fom_reset,
    new_fom_state,
)
from rlsopt.core.fom.sgd import sgd_iterate, sgd_step_size
from rlsopt.core.problem import ProblemInstance

_ITERATE = {
    FomMode.SGD: sgd_iterate,
    FomMode.AGM: agm_iterate,
}


def fom_iterate(state: FomState, instance: ProblemInstance, r: float, config: FomConfig) -> FomState:
    """One iteration of whichever subroutine *state* runs."""
    return _ITERATE[state.mode](state, instance, r, config)


__all__ = [
    "ApgStep",
    "FomConfig",
    "FomMode",
    "FomState",
    "agm_iterate",
    "apg_root",
    "apg_step",
    "check_restart_trigger",
    "fom_iterate",
    "fom_reset",
    "new_fom_state",
    "sgd_iterate",
    "sgd_step_size",
]
