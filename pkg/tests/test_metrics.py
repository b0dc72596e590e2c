import pytest

from rlsopt.core.errors import SolverError
from rlsopt.core.levelset import init_level_sequence
from rlsopt.core.passes import OracleEvent, PassConvention
from rlsopt.core.trace import TraceRecord
from rlsopt.experiments.metrics import (
    count_data_pass,
    critical_index,
    estimate_fstar,
    first_hit,
)


def test_estimate_fstar_filters_then_minimizes():
    assert estimate_fstar([(1.0, 1e-6), (0.9, 1e-4), (0.95, 0.0)]) == 0.95


def test_estimate_fstar_all_infeasible():
    with pytest.raises(SolverError, match="no feasible"):
        estimate_fstar([(1.0, 1.0), (0.5, 0.1)])


def test_sgd_iteration_costs_four_passes():
    events = (
        OracleEvent.OBJECTIVE_SUBGRADIENT,
        OracleEvent.CONSTRAINT_SUBGRADIENT,
        OracleEvent.OBJECTIVE_VALUE,
        OracleEvent.CONSTRAINT_VALUE,
        OracleEvent.UPDATE,
    )
    assert sum(count_data_pass(e) for e in events) == 4


def test_trigger_check_costs_two_passes():
    assert count_data_pass(OracleEvent.OBJECTIVE_VALUE) + count_data_pass(OracleEvent.CONSTRAINT_VALUE) == 2


def test_update_convention():
    assert count_data_pass(OracleEvent.UPDATE, PassConvention.UPDATE) == 1
    assert count_data_pass(OracleEvent.OBJECTIVE_VALUE, PassConvention.UPDATE) == 0


def test_critical_index_on_initial_chain(ring1):
    seq = init_level_sequence(ring1, [0.0, 0.0], -11.0, 0.5, 5)
    # levels -11, -5.5, -2.75, -1.375, -0.6875: index 3 is the first with
    # alpha P >= f* - r (0.6875 >= 0.375)
    assert critical_index(seq, ring1, -1.0) == 3


def test_critical_index_none_when_all_progress(ring1):
    seq = init_level_sequence(ring1, [1.0, 0.0], -11.0, 0.5, 0)
    assert critical_index(seq, ring1, -1.0) is None


def _row(fom_iters, p):
    return TraceRecord(1, fom_iters, 0, 0.0, 0.0, p, 0, None)


def test_first_hit():
    rows = [_row(10, 1.0), _row(20, None), _row(30, 0.2), _row(40, 0.1)]
    assert first_hit(rows, 0.25) == 30
    assert first_hit(rows, 0.01) is None
