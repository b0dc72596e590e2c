"""Oracle events and their cost in data passes.

A data pass is one full evaluation of the objective, or of the constraint
bundle, over its data split. Subroutines record oracle events; the cost of
an event depends on the convention of the experiment reading the counters.
"""

from __future__ import annotations

from collections import Counter
from enum import Enum


class OracleEvent(str, Enum):
    OBJECTIVE_VALUE = "objective-value"
    OBJECTIVE_SUBGRADIENT = "objective-subgradient"
    CONSTRAINT_VALUE = "constraint-value"
    CONSTRAINT_SUBGRADIENT = "constraint-subgradient"
    SMOOTHED_VALUE_GRADIENT = "smoothed-value-gradient"
    UPDATE = "update"


class PassConvention(str, Enum):
    """How oracle events translate into data passes.

    ``dataset``: objective and constraint bundle each cost one pass per
    evaluation; a smoothed value+gradient touches both, so it costs two.
    ``update``: one pass per subroutine update, for tiny analytic instances
    where a pass has no data meaning.
    """

    DATASET = "dataset"
    UPDATE = "update"


# A P evaluation touches the objective and the whole constraint bundle.
P_VALUE = (OracleEvent.OBJECTIVE_VALUE, OracleEvent.CONSTRAINT_VALUE)
P_SUBGRADIENT = (OracleEvent.OBJECTIVE_SUBGRADIENT, OracleEvent.CONSTRAINT_SUBGRADIENT)

_COSTS: dict[PassConvention, dict[OracleEvent, int]] = {
    PassConvention.DATASET: {
        OracleEvent.OBJECTIVE_VALUE: 1,
        OracleEvent.OBJECTIVE_SUBGRADIENT: 1,
        OracleEvent.CONSTRAINT_VALUE: 1,
        OracleEvent.CONSTRAINT_SUBGRADIENT: 1,
        OracleEvent.SMOOTHED_VALUE_GRADIENT: 2,
        OracleEvent.UPDATE: 0,
    },
    PassConvention.UPDATE: {
        OracleEvent.OBJECTIVE_VALUE: 0,
        OracleEvent.OBJECTIVE_SUBGRADIENT: 0,
        OracleEvent.CONSTRAINT_VALUE: 0,
        OracleEvent.CONSTRAINT_SUBGRADIENT: 0,
        OracleEvent.SMOOTHED_VALUE_GRADIENT: 0,
        OracleEvent.UPDATE: 1,
    },
}


def count_data_pass(
    event: OracleEvent,
    convention: PassConvention = PassConvention.DATASET,
) -> int:
    """Return the pass increment for one oracle event."""
    return _COSTS[PassConvention(convention)][OracleEvent(event)]


def count_passes(
    events: Counter[OracleEvent],
    convention: PassConvention = PassConvention.DATASET,
) -> int:
    """Total passes for a counter of oracle events."""
    return sum(count_data_pass(event, convention) * n for event, n in events.items())
