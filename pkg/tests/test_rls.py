import math

import numpy as np
import pytest

import rlsopt.core.rls as rls
from rlsopt.core.errors import InputError
from rlsopt.core.fom import FomConfig, FomMode
from rlsopt.core.levelset import eval_P
from rlsopt.core.passes import PassConvention
from rlsopt.core.rls import (
    SolverConfig,
    execute_restart,
    reference_level_set_run,
    rls_init,
    rls_outer_iteration,
    rls_run,
)
from rlsopt.core.trace import ROW_ITERATION, ROW_RESTART, MemorySink
from rlsopt.experiments.metrics import critical_index
from rlsopt.experiments.ringlp import build_ring_lp

X0 = np.zeros(2)
# alpha and B this small never trigger in a single ring-LP step
QUIET = FomConfig(alpha=0.01, B=0.02)


def test_init_on_ring(ring1):
    state = rls_init(ring1, X0, -11.0, SolverConfig(epsilon=1.0))
    assert state.K == 77
    assert len(state.instances) == 78
    assert state.levels[:3] == [-11.0, -5.5, -2.75]
    assert all(s.t == 0 and np.array_equal(s.x0, X0) for s in state.instances)
    assert state.surrogates.K_tilde == 77


def test_init_small_epsilon(ring1):
    assert rls_init(ring1, X0, -11.0, SolverConfig(epsilon=0.01)).K == 187


def test_init_with_explicit_level_count(ring1):
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2))
    assert state.levels == [-11.0, -5.5, -2.75]
    assert state.surrogates is None


def test_outer_iteration_without_trigger_keeps_levels(ring1):
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2, fom=QUIET))
    before = list(state.levels)
    rls_outer_iteration(state, ring1)
    assert state.levels == before
    assert state.restarts == 0
    assert state.fom_iters == 3
    assert all(s.t == 1 for s in state.instances)


def test_outer_iteration_restarts_at_smallest_index(ring1, monkeypatch):
    # small epsilon keeps all nine instances active
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=8, epsilon=0.01, fom=QUIET))
    chosen = {id(state.instances[3]), id(state.instances[7])}
    monkeypatch.setattr(rls, "check_restart_trigger", lambda s, config: id(s) in chosen)
    rls_outer_iteration(state, ring1)
    assert state.trigger_events == 2
    assert [e.k_prime for e in state.restart_log] == [3]
    assert state.last_k_prime == 3


def test_idle_instances_are_not_advanced(ring1):
    # P0 = 11, 5.5, 2.75 against epsilon = 3
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2, epsilon=3.0, fom=QUIET))
    rls_outer_iteration(state, ring1)
    assert [s.t for s in state.instances] == [1, 1, 0]
    assert state.fom_iters == 2
    np.testing.assert_array_equal(state.instances[2].x_cur, X0)


def test_idle_instances_never_trigger(ring1, monkeypatch):
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2, epsilon=3.0, fom=QUIET))
    idle = state.instances[2]
    monkeypatch.setattr(rls, "check_restart_trigger", lambda s, config: s is idle)
    rls_outer_iteration(state, ring1)
    assert state.trigger_events == 0
    assert state.restart_log == []


def test_run_stops_when_every_instance_is_idle(ring1):
    # P0 of the lowest instance is 11 at x_ini
    report = rls_run(ring1, X0, -11.0, SolverConfig(num_levels=1, epsilon=20.0, budget=100))
    assert report.outer_iterations == 0
    assert report.iterations == 0
    np.testing.assert_array_equal(report.x_best, X0)


def test_restart_rechains_levels(ring1):
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2, epsilon=1.0))
    state.instances[0].best_x = np.array([1.0, 0.0])
    assert eval_P(ring1, [1.0, 0.0], -11.0) == 10.0
    event = execute_restart(state, ring1, 0)
    assert state.levels == [-11.0, -6.0, -3.0]
    assert event.P0_before == 11.0
    assert event.P0_after == 10.0
    np.testing.assert_array_equal(state.instances[0].x0, [1.0, 0.0])
    # feasible with f = -1 < f(x_ini) = 0
    assert event.improved
    np.testing.assert_array_equal(state.x_best, [1.0, 0.0])
    assert state.epochs == [1, 0, 0]


def test_restart_at_top_index_keeps_levels(ring1):
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2, epsilon=1.0))
    state.instances[2].best_x = np.array([0.5, 0.0])
    execute_restart(state, ring1, 2)
    assert state.levels == [-11.0, -5.5, -2.75]
    np.testing.assert_array_equal(state.instances[2].x0, [0.5, 0.0])
    np.testing.assert_array_equal(state.instances[1].x0, X0)


def test_restart_ignores_infeasible_candidate(ring1):
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2, epsilon=1.0))
    # g((3, 0)) = 2 = 2 eps
    state.instances[1].best_x = np.array([3.0, 0.0])
    event = execute_restart(state, ring1, 1)
    assert event.g == 2.0
    assert not event.improved
    np.testing.assert_array_equal(state.x_best, X0)


def test_zero_budget_returns_x_ini(ring1):
    report = rls_run(ring1, X0, -11.0, SolverConfig(epsilon=1.0), budget=0)
    np.testing.assert_array_equal(report.x_best, X0)
    assert report.iterations == 0
    assert len(report.trace) == 0


def test_negative_budget_rejected(ring1):
    with pytest.raises(InputError):
        rls_run(ring1, X0, -11.0, SolverConfig(), budget=-1)


def test_one_trace_row_per_outer_iteration(ring1):
    config = SolverConfig(epsilon=1.0, budget=780)
    report = rls_run(ring1, X0, -11.0, config)
    assert report.outer_iterations == 10
    rows = [r for r in report.trace if r.event == ROW_ITERATION]
    assert [r.outer_iter for r in rows] == list(range(1, 11))
    assert report.trace.last.fom_iters == report.iterations
    # instances with P0 <= epsilon are not advanced
    assert 10 <= report.iterations < 780
    assert all(r.p_at_fstar is not None for r in report.trace)


def test_pass_counting_dataset_convention(ring1):
    state = rls_init(ring1, X0, -11.0, SolverConfig(num_levels=2, fom=QUIET))
    # one P eval per reset plus the initial candidate check
    assert state.data_passes == 2 * 3 + 2
    rls_outer_iteration(state, ring1)
    assert state.data_passes == 2 * 3 + 2 + 4 * 3


def test_pass_counting_update_convention(ring1):
    config = SolverConfig(num_levels=2, fom=QUIET, pass_convention=PassConvention.UPDATE)
    state = rls_init(ring1, X0, -11.0, config)
    assert state.data_passes == 0
    rls_outer_iteration(state, ring1)
    assert state.data_passes == 3


def test_pass_budget_stops_run(ring1):
    config = SolverConfig(
        num_levels=2,
        fom=QUIET,
        budget=10_000,
        pass_convention=PassConvention.UPDATE,
        pass_budget=9,
    )
    report = rls_run(ring1, X0, -11.0, config)
    assert report.data_passes == 9
    assert report.outer_iterations == 3


def test_parallel_matches_sequential(ring1):
    base = SolverConfig(epsilon=0.5, budget=3000)
    seq = rls_run(ring1, X0, -11.0, base)
    par = rls_run(ring1, X0, -11.0, SolverConfig(epsilon=0.5, budget=3000, workers=4))
    assert seq.trace.records == par.trace.records
    np.testing.assert_array_equal(seq.x_best, par.x_best)
    assert seq.levels == par.levels


def test_repeated_runs_are_identical(ring1):
    config = SolverConfig(epsilon=1.0, budget=2000, mode=FomMode.AGM)
    a = rls_run(ring1, X0, -11.0, config)
    b = rls_run(ring1, X0, -11.0, config)
    assert a.trace.records == b.trace.records


def test_level_chain_survives_every_restart(ring1):
    residuals = []

    def check(state, event):
        assert state.levels[0] == -11.0
        residuals.append(float(np.max(np.abs(state.level_sequence.residuals(ring1)))))

    report = rls_run(ring1, X0, -11.0, SolverConfig(epsilon=1.0, budget=10_000), on_restart=check)
    assert report.restarts > 0
    assert max(residuals) <= 1e-9
    assert report.levels[0] == -11.0


def test_x_best_is_feasible_once_moved(ring1):
    report = rls_run(ring1, X0, -11.0, SolverConfig(epsilon=0.5, budget=5000))
    if not np.array_equal(report.x_best, X0):
        assert report.g_best <= 0.5


def test_early_exit(ring1):
    config = SolverConfig(epsilon=1.0, budget=100_000, early_exit=True)
    report = rls_run(ring1, X0, -11.0, config)
    assert report.iterations < 100_000
    assert report.g_best <= 1.0


def test_ring_lp_converges_at_unit_epsilon(ring1):
    report = rls_run(ring1, X0, -11.0, SolverConfig(epsilon=1.0, budget=10_000))
    assert report.f_best - (-1.0) <= 1.0
    assert report.g_best <= 1.0


@pytest.mark.slow
@pytest.mark.parametrize("rho", [1.0, 2.0, 3.0, 4.0, 5.0])
@pytest.mark.parametrize("eps", [1.0, 0.5, 0.25])
def test_ring_lp_convergence_grid(rho, eps):
    inst = build_ring_lp(rho)
    report = rls_run(inst, X0, -11.0, SolverConfig(epsilon=eps, budget=10_000))
    assert report.f_best - (-1.0) <= eps
    assert report.g_best <= eps


@pytest.mark.slow
def test_critical_index_never_decreases(ring1):
    seen = []

    def record(state, event):
        k = critical_index(state.level_sequence, ring1, -1.0)
        seen.append(state.K + 1 if k is None else k)

    rls_run(ring1, X0, -11.0, SolverConfig(epsilon=0.25, budget=10_000), on_restart=record)
    assert seen
    assert all(b >= a for a, b in zip(seen, seen[1:]))


def test_reference_run_on_ring(ring1):
    report = reference_level_set_run(ring1, r0=-11.0, alpha=0.5, epsilon=0.1, f_star=-1.0)
    assert report.outer_iterations <= 22
    assert report.f + 1.0 <= 0.1
    assert report.g <= 0.1
    levels = report.levels
    assert all(b > a for a, b in zip(levels, levels[1:]))
    assert all(r < -1.0 for r in levels)
    theta = 0.5
    for a, b in zip(levels, levels[1:]):
        assert -1.0 - b <= (1 - 0.5 * theta) * (-1.0 - a) + 1e-9


def test_reference_run_rejects_level_above_fstar(ring1):
    with pytest.raises(InputError):
        reference_level_set_run(ring1, r0=0.0, alpha=0.5, epsilon=0.1, f_star=-1.0)


def test_report_summary_matches_trace_tail(ring1):
    report = rls_run(ring1, X0, -11.0, SolverConfig(epsilon=1.0, budget=1560))
    summary = report.summary()
    tail = report.trace.last
    assert summary["iterations"] == tail.fom_iters
    assert summary["data_passes"] == tail.data_passes
    assert summary["restarts"] == tail.restarts
    assert summary["f_best"] == tail.f
    assert math.isfinite(summary["g_best"])


@pytest.mark.parametrize("eps", [1.0, 0.25])
def test_accelerated_run_uses_full_budget(ring1, eps):
    config = SolverConfig(epsilon=eps, budget=10_000, mode=FomMode.AGM)
    report = rls_run(ring1, X0, -11.0, config)
    # the r = -11 instance has P0 >= 10 and never idles
    assert report.outer_iterations == math.ceil(10_000 / (report.K + 1))
    assert report.g_best <= eps
    assert report.f_best <= 0.0


def test_restart_rows_in_trace(ring1):
    events = []
    sink = MemorySink()
    report = rls_run(
        ring1, X0, -11.0, SolverConfig(epsilon=1.0, budget=10_000),
        sink=sink, on_restart=lambda state, event: events.append(event),
    )
    restart_rows = [r for r in sink if r.event == ROW_RESTART]
    assert report.restarts > 0
    assert len(restart_rows) == len(events) == report.restarts
    assert len(sink) == report.outer_iterations + report.restarts
    assert [r.last_kprime for r in restart_rows] == [e.k_prime for e in events]
    assert [r.restarts for r in restart_rows] == list(range(1, report.restarts + 1))


def test_best_objective_never_increases(ring1):
    seen = []

    def record(state, event):
        seen.append(state.f_best)

    rls_run(ring1, X0, -11.0, SolverConfig(epsilon=0.5, budget=10_000), on_restart=record)
    assert seen
    assert all(b <= a for a, b in zip(seen, seen[1:]))
