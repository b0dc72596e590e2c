"""Level-set function, its smoothing, and the level-parameter chain.

For a level parameter r the subproblem is ``min_{x in X} P(x; r)`` with
``P(x; r) = max(f0(x) - r, g(x))``. Its optimal value H(r) is zero exactly
at r = f*, which is what the level updates chase.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import logsumexp, softmax

from rlsopt.core.errors import InputError
from rlsopt.core.problem import (
    ProblemInstance,
    Vector,
    as_point,
    eval_max_constraint,
)

lg = logging.getLogger(__name__)


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not sigma > 0 or not math.isfinite(sigma):
        raise InputError(f"smoothing parameter must be positive, got {sigma}")
    return sigma


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise InputError(f"epsilon must be positive, got {epsilon}")
    return epsilon


def level_terms(instance: ProblemInstance, x: Any, r: float) -> Vector:
    """The terms inside the max: (f0(x) - r, f1(x), ..., fm(x))."""
    point = as_point(x, instance.dimension)
    terms = np.empty(instance.num_constraints + 1)
    terms[0] = instance.objective.value(point) - r
    for i, fn in enumerate(instance.constraints, start=1):
        terms[i] = fn.value(point)
    return terms


def _term_gradients(instance: ProblemInstance, x: Vector) -> np.ndarray:
    return np.stack([fn.subgradient(x) for fn in instance.components])


def eval_P(instance: ProblemInstance, x: Any, r: float) -> float:
    """P(x; r) = max(f0(x) - r, g(x)); f0(x) - r when there are no constraints."""
    return float(np.max(level_terms(instance, x, r)))


def subgrad_P(instance: ProblemInstance, x: Any, r: float) -> Vector:
    """Subgradient of the achieving term of P(.; r) at x.

    The objective term wins ties; among constraints the smallest index wins.
    """
    point = as_point(x, instance.dimension)
    f_minus_r = instance.objective.value(point) - r
    g, index = eval_max_constraint(instance, point)
    if f_minus_r >= g:
        return instance.objective.subgradient(point)
    return instance.constraints[index].subgradient(point)


def smoothing_weights(instance: ProblemInstance, x: Any, r: float, sigma: float) -> Vector:
    """Softmax weights of the terms of P at scale sigma; they sum to one."""
    sigma = _check_sigma(sigma)
    return softmax(sigma * level_terms(instance, x, r))


def _smoothed(terms: Vector, sigma: float) -> float:
    # Shifting by the max keeps the log argument >= 1, so the result is never below max(terms).
    top = float(np.max(terms))
    return top + float(logsumexp(sigma * (terms - top))) / sigma


def eval_P_sigma(instance: ProblemInstance, x: Any, r: float, sigma: float) -> float:
    """(1/sigma) ln(exp(sigma (f0(x) - r)) + sum_i exp(sigma f_i(x)))."""
    sigma = _check_sigma(sigma)
    return _smoothed(level_terms(instance, x, r), sigma)


def grad_P_sigma(instance: ProblemInstance, x: Any, r: float, sigma: float) -> Vector:
    """Softmax-weighted combination of the component (sub)gradients."""
    return value_and_grad_P_sigma(instance, x, r, sigma)[1]


def value_and_grad_P_sigma(
    instance: ProblemInstance, x: Any, r: float, sigma: float
) -> tuple[float, Vector]:
    sigma = _check_sigma(sigma)
    point = as_point(x, instance.dimension)
    terms = level_terms(instance, point, r)
    weights = softmax(sigma * terms)
    grad = weights @ _term_gradients(instance, point)
    return _smoothed(terms, sigma), grad


# -- level sequence -----------------------------------------------------------


@dataclass
class LevelSequence:
    """Pairs (x_k0, r_k), k = 0..K, linked by r_{k+1} = r_k + alpha P(x_k0; r_k)."""

    alpha: float
    points: list[Vector] = field(default_factory=list)
    levels: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def K(self) -> int:
        return len(self.levels) - 1

    def residuals(self, instance: ProblemInstance) -> Vector:
        """r_{k+1} - r_k - alpha P(x_k0; r_k) for k < K."""
        return np.array(
            [
                self.levels[k + 1] - self.levels[k]
                - self.alpha * eval_P(instance, self.points[k], self.levels[k])
                for k in range(self.K)
            ],
            dtype=np.float64,
        )


def init_level_sequence(
    instance: ProblemInstance, x_ini: Any, r_ini: float, alpha: float, K: int
) -> LevelSequence:
    """All x_k0 = x_ini, r_0 = r_ini and the chain rule for the rest."""
    alpha = _check_alpha(alpha)
    if K < 0:
        raise InputError(f"K must be non-negative, got {K}")
    x = as_point(x_ini, instance.dimension)
    seq = LevelSequence(alpha=alpha)
    r = float(r_ini)
    for k in range(K + 1):
        seq.points.append(x.copy())
        seq.levels.append(r)
        if k < K:
            r = r + alpha * eval_P(instance, x, r)
    return seq


# -- surrogates and diagnostics -----------------------------------------------


@dataclass(frozen=True)
class SurrogateBundle:
    r_tilde: float
    theta_tilde: float
    K_tilde: int


def compute_surrogates(
    instance: ProblemInstance,
    x_tilde: Any,
    r_ini: float,
    alpha: float,
    epsilon: float,
) -> SurrogateBundle:
    """Computable stand-ins for f*, the condition measure and the instance count.

    ``r_tilde = f(x~) - g(x~)`` bounds f* from above; ``theta_tilde`` is
    evaluated once at ``r_ini``.
    """
    alpha = _check_alpha(alpha)
    epsilon = _check_epsilon(epsilon)
    if instance.num_constraints == 0:
        raise InputError("surrogates need at least one constraint")
    point = as_point(x_tilde, instance.dimension)
    g, _ = eval_max_constraint(instance, point)
    if not g < 0:
        raise InputError(f"point is not strictly feasible (g = {g:.6g})")
    r_tilde = instance.objective.value(point) - g
    if not r_ini < r_tilde:
        raise InputError(
            f"level parameter too large: r_ini = {r_ini:.6g} must be below r_tilde = {r_tilde:.6g}"
        )
    theta_tilde = g / (r_ini - r_tilde)
    ratio = (r_tilde - r_ini) / (alpha * epsilon)
    K_tilde = max(1, math.ceil(math.log(ratio) / (alpha * theta_tilde)))
    bundle = SurrogateBundle(r_tilde=r_tilde, theta_tilde=theta_tilde, K_tilde=K_tilde)
    lg.debug("surrogates: %s", bundle)
    return bundle


def compute_hatK(theta: float, f_star: float, r0: float, alpha: float, epsilon: float) -> int:
    """Outer-iteration bound of the level-set method with f* known; at least 1."""
    alpha = _check_alpha(alpha)
    epsilon = _check_epsilon(epsilon)
    if not 0.0 < theta <= 1.0:
        raise InputError(f"theta must lie in (0, 1], got {theta}")
    if not r0 < f_star:
        raise InputError(f"r0 = {r0} must be below f_star = {f_star}")
    value = math.log((f_star - r0) / (alpha * epsilon)) / (alpha * theta)
    return max(1, math.ceil(value))


def compute_nfom(
    mode: str,
    M: float,
    G: float,
    d: float,
    L: float,
    alpha: float,
    B: float,
    epsilon: float,
    gamma: float = 2.0,
    m: int = 1,
) -> int:
    """Per-restart iteration cap of the subroutine for the given mode."""
    alpha = _check_alpha(alpha)
    epsilon = _check_epsilon(epsilon)
    if not alpha < B < 1.0:
        raise InputError(f"B must lie in (alpha, 1), got {B}")
    if not (M > 0 and G > 0 and d >= 1 and L >= 0):
        raise InputError("need M > 0, G > 0, d >= 1 and L >= 0")
    gap = B - alpha
    if mode in ("nonsmooth", "sgd"):
        return math.ceil(M**2 * G ** (2 / d) / (gap**2 * epsilon ** (2 - 2 / d))) - 1
    if mode in ("smooth", "agm"):
        if not gamma > 1:
            raise InputError(f"gamma must exceed 1, got {gamma}")
        first = 3 * math.sqrt(gamma * math.log(m + 1)) * M * G ** (1 / d) / (gap * epsilon ** (1 - 1 / d))
        second = math.sqrt(3 * gamma * L * G ** (2 / d) / (gap * epsilon ** (1 - 2 / d)))
        return math.ceil(max(first, second))
    raise InputError(f"unknown mode: {mode!r}")


def compute_dtilde(
    K_tilde: int,
    alpha: float,
    B: float,
    epsilon: float,
    f_star: float,
    r_ini: float,
    f_x_ini: float,
    theta: float,
) -> float:
    """Upper bound on the number of restarts that move the critical index.

    Diagnostic only; the solver never reads it.
    """
    alpha = _check_alpha(alpha)
    epsilon = _check_epsilon(epsilon)
    if not alpha < B < 1.0:
        raise InputError(f"B must lie in (alpha, 1), got {B}")
    if not r_ini < f_star:
        raise InputError("r_ini must be below f_star")
    head = (
        K_tilde * math.log(1 / (1 - alpha))
        + math.log((f_star - r_ini) / (alpha * (1 - B) * epsilon))
        + 2 * math.log((f_x_ini - r_ini) / epsilon)
    )
    tail = math.log(2 * (f_star - r_ini) / (alpha * epsilon)) / math.log(1 + alpha * (1 - B) * theta / 2)
    return (K_tilde + 1) * head / math.log(1 / B) + K_tilde * tail


def complexity_bound(K_tilde: int, n_fom: int, d_tilde: float) -> float:
    """Total subroutine iterations guaranteed to reach an epsilon-solution."""
    return (K_tilde + 1) * n_fom * d_tilde
