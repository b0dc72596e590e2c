from __future__ import annotations

import numpy as np
import pytest

from rlsopt.core.problem import (
    AllSpace,
    Ball,
    InstanceMetadata,
    LinearFunction,
    ProblemInstance,
)
from rlsopt.experiments.fairness import build_fairness_instance, generate_synthetic_fairness
from rlsopt.experiments.ringlp import build_ring_lp


@pytest.fixture
def ring1() -> ProblemInstance:
    return build_ring_lp(1.0)


@pytest.fixture(scope="session")
def fairness_small() -> ProblemInstance:
    return build_fairness_instance(generate_synthetic_fairness(60, 3, seed=7))


@pytest.fixture
def halfline() -> ProblemInstance:
    """min x s.t. 1 - x <= 0 on R: x* = 1, f* = 1."""
    return ProblemInstance(
        objective=LinearFunction(c=[1.0]),
        constraints=(LinearFunction(c=[-1.0], b=1.0),),
        feasible_set=AllSpace(),
        metadata=InstanceMetadata(f_star=1.0, x_star=np.array([1.0])),
    )


@pytest.fixture
def ball_box_problem() -> ProblemInstance:
    """min -x1 - x2 s.t. x1 - 1 <= 0 on the radius-2 ball; x~ = 0."""
    return ProblemInstance(
        objective=LinearFunction(c=[-1.0, -1.0]),
        constraints=(LinearFunction(c=[1.0, 0.0], b=-1.0),),
        feasible_set=Ball(center=np.zeros(2), radius=2.0),
        metadata=InstanceMetadata(strictly_feasible_point=np.zeros(2)),
    )
