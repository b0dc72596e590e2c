import math

import numpy as np
import pytest

from rlsopt.core.errors import InputError, LineSearchError
from rlsopt.core.fom import (
    FomConfig,
    FomMode,
    FomState,
    agm_iterate,
    apg_root,
    apg_step,
    check_restart_trigger,
    fom_iterate,
    fom_reset,
    new_fom_state,
    sgd_iterate,
    sgd_step_size,
)
from rlsopt.core.levelset import eval_P, eval_P_sigma, grad_P_sigma
from rlsopt.core.passes import OracleEvent
from rlsopt.core.problem import Ball, InstanceMetadata, LinearFunction, ProblemInstance
from rlsopt.experiments.ringlp import GridSpec, build_ring_lp, grid_minimize

CONFIG = FomConfig(alpha=0.5, B=0.95)


def test_reset_on_ring(ring1):
    state = new_fom_state(FomMode.SGD, ring1, [0.0, 0.0], -11.0, CONFIG)
    assert state.P0 == 11.0
    assert state.t == 0
    assert state.best_P == 11.0
    assert CONFIG.progress_gap * state.P0 == pytest.approx(4.95)
    assert state.events[OracleEvent.OBJECTIVE_VALUE] == 1


def test_agm_reset_smoothing_parameter(ring1):
    state = new_fom_state(FomMode.AGM, ring1, [0.0, 0.0], -11.0, CONFIG)
    # m = 20 constraints
    assert state.sigma == pytest.approx(3 * math.log(21) / (0.45 * 11))
    assert state.L_hat == state.sigma
    assert state.A == 0.0
    np.testing.assert_array_equal(state.v, state.x0)
    np.testing.assert_array_equal(state.grad_accum, [0.0, 0.0])


def test_reset_is_deterministic(ring1):
    a = new_fom_state(FomMode.AGM, ring1, [0.3, 0.1], -4.0, CONFIG)
    b = new_fom_state(FomMode.AGM, ring1, [0.3, 0.1], -4.0, CONFIG)
    agm_iterate(a, ring1, -4.0, CONFIG)
    fom_reset(a, ring1, [0.3, 0.1], -4.0, CONFIG)
    for name in ("r", "t", "P0", "P_cur", "best_P", "sigma", "L_hat", "A"):
        assert getattr(a, name) == getattr(b, name)
    for name in ("x0", "x_cur", "best_x", "v", "grad_accum"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    # lifetime counters survive
    assert a.iterations == 1
    assert a.resets == 2


def test_sgd_first_step_on_ring(ring1):
    state = new_fom_state(FomMode.SGD, ring1, [0.0, 0.0], -11.0, CONFIG)
    sgd_iterate(state, ring1, -11.0, CONFIG)
    np.testing.assert_allclose(state.x_cur, [4.95, 0.0])
    assert state.best_P == pytest.approx(6.05)
    assert state.t == 1


def test_sgd_projection_clips():
    inst = ProblemInstance(
        objective=LinearFunction(c=[1.0, 0.0]),
        constraints=(LinearFunction(c=[0.0, 0.0], b=-10.0),),
        feasible_set=Ball(center=[0.0, 0.0], radius=0.25),
    )
    config = FomConfig(alpha=0.25, B=0.75)
    state = new_fom_state(FomMode.SGD, inst, [0.0, 0.0], -1.0, config)
    assert sgd_step_size(state, config, 1.0) == 0.5
    sgd_iterate(state, inst, -1.0, config)
    np.testing.assert_allclose(state.x_cur, [-0.25, 0.0])


def test_sgd_zero_subgradient_keeps_point():
    inst = ProblemInstance(
        objective=LinearFunction(c=[0.0]),
        constraints=(LinearFunction(c=[0.0], b=-1.0),),
        feasible_set=Ball(center=[0.0], radius=1.0),
    )
    state = new_fom_state(FomMode.SGD, inst, [0.5], 0.0, CONFIG)
    sgd_iterate(state, inst, 0.0, CONFIG)
    np.testing.assert_array_equal(state.x_cur, [0.5])
    assert state.zero_steps == 1


def test_best_P_tracks_minimum(ring1):
    state = new_fom_state(FomMode.SGD, ring1, [0.0, 0.0], -3.0, CONFIG)
    seen = [state.P_cur]
    for _ in range(60):
        sgd_iterate(state, ring1, -3.0, CONFIG)
        seen.append(state.P_cur)
        assert state.best_P == min(seen)
        assert eval_P(ring1, state.best_x, -3.0) == state.best_P


def test_iterate_rejects_wrong_mode(ring1):
    state = new_fom_state(FomMode.AGM, ring1, [0.0, 0.0], -11.0, CONFIG)
    with pytest.raises(InputError):
        sgd_iterate(state, ring1, -11.0, CONFIG)


def test_apg_root_examples():
    assert apg_root(2.0, 0.0) == 1.0
    assert apg_root(2.0, 1.0) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)


def test_apg_constant_gradient_exits_first_trial():
    grad = lambda x: np.array([1.0, -2.0])  # noqa: E731
    step = apg_step(grad, np.array([1.0, 1.0]), np.zeros(2), 4.0, 0.0, 2.0, lambda y: y)
    assert step.trials == 1
    assert step.L_hat == 4.0
    assert step.a == apg_root(4.0, 0.0)


def test_apg_exit_inequality_holds_post_hoc(ring1):
    sigma = 2.0
    grad = lambda y: grad_P_sigma(ring1, y, -2.0, sigma)  # noqa: E731
    x = np.array([0.5, 0.5])
    v = np.array([-1.0, 0.3])
    step = apg_step(grad, x, v, 0.01, 1.5, 2.0, lambda y: y)
    diff = grad(x) - grad(step.y)
    assert step.L_hat * float(diff @ (x - step.y)) >= float(diff @ diff)


def test_apg_line_search_cap():
    grad = lambda x: 1e30 * x  # noqa: E731
    with pytest.raises(LineSearchError) as info:
        apg_step(grad, np.array([1.0]), np.array([0.0]), 1.0, 0.0, 2.0, lambda y: y, cap=3)
    assert info.value.trials == 3


def test_agm_state_invariants():
    inst = ProblemInstance(
        objective=LinearFunction(c=[-1.0, -1.0]),
        constraints=(LinearFunction(c=[1.0, 0.0], b=-1.0),),
        feasible_set=Ball(center=[0.0, 0.0], radius=2.0),
        metadata=InstanceMetadata(strictly_feasible_point=np.zeros(2)),
    )
    state = new_fom_state(FomMode.AGM, inst, [0.0, 0.0], -5.0, CONFIG)
    A_prev = state.A
    for _ in range(30):
        fom_iterate(state, inst, -5.0, CONFIG)
        assert state.A > A_prev
        assert state.L_hat > 0
        assert inst.feasible_set.contains(state.v)
        assert inst.feasible_set.contains(state.x_cur)
        A_prev = state.A
    assert state.events[OracleEvent.SMOOTHED_VALUE_GRADIENT] > 0


@pytest.mark.parametrize(
    "P0, best_P, expected",
    [(11.0, 10.0, True), (11.0, 10.5, False), (-0.2, -5.0, False)],
)
def test_restart_trigger(P0, best_P, expected):
    state = FomState(mode=FomMode.SGD, P0=P0, best_P=best_P)
    assert check_restart_trigger(state, CONFIG) is expected


def test_sgd_reaches_trigger_within_nfom():
    # n_fom = ceil(M^2 G^2 / (B - alpha)^2) - 1 with d = 1
    for rho in (1.0, 2.0, 3.0, 4.0, 5.0):
        inst = build_ring_lp(rho)
        meta = inst.metadata
        n_fom = math.ceil(meta.subgrad_bound_M**2 * meta.ebc_G**2 / CONFIG.progress_gap**2) - 1
        for eps in (1.0, 0.5):
            for r in (-11.0, -4.0, -2.0, -1.0 - 2 * eps):
                state = new_fom_state(FomMode.SGD, inst, [0.0, 0.0], r, CONFIG)
                assert state.P0 > eps
                for _ in range(n_fom):
                    if check_restart_trigger(state, CONFIG) or CONFIG.alpha * state.best_P < -1.0 - r:
                        break
                    sgd_iterate(state, inst, r, CONFIG)
                assert check_restart_trigger(state, CONFIG) or CONFIG.alpha * state.best_P < -1.0 - r


@pytest.mark.slow
def test_agm_rate_on_smoothed_ring(ring1):
    r, sigma, gamma = -11.0, 1.8146, 2.0
    H, x_grid = grid_minimize(ring1, r, GridSpec(bounds=((-2.0, 8.0), (-2.0, 2.0))))
    assert H == pytest.approx(5.0, abs=1e-9)
    assert x_grid[0] == pytest.approx(6.0, abs=1e-9)

    state = new_fom_state(FomMode.AGM, ring1, [0.0, 0.0], r, CONFIG)
    state.sigma = sigma
    state.L_hat = sigma
    meta = ring1.metadata
    dist2 = float((state.x0 - x_grid) @ (state.x0 - x_grid))
    scale = gamma * (sigma * meta.subgrad_bound_M**2 + meta.smooth_L) * dist2
    target = eval_P_sigma(ring1, x_grid, r, sigma)
    for t in range(1, 501):
        agm_iterate(state, ring1, r, CONFIG)
        assert eval_P_sigma(ring1, state.x_cur, r, sigma) - target <= scale / t**2 + 1e-6


def test_relevel_same_point_costs_no_pass(ring1):
    state = new_fom_state(FomMode.SGD, ring1, [0.0, 0.0], -11.0, CONFIG)
    fom_reset(state, ring1, [0.0, 0.0], -5.5, CONFIG)
    assert state.P0 == 5.5
    assert state.events[OracleEvent.OBJECTIVE_VALUE] == 1
    fom_reset(state, ring1, [1.0, 0.0], -5.5, CONFIG)
    assert state.P0 == 4.5
    assert state.events[OracleEvent.OBJECTIVE_VALUE] == 2
