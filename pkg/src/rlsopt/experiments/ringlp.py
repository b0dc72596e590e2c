"""Ring linear program and a brute-force grid oracle for 2-D instances.

The ring LP minimizes -x1 over a regular 20-gon scaled by rho:

    rho * (cos(i pi/10) x1 + sin(i pi/10) x2) <= rho,   i = 0..19

so x* = (1, 0), f* = -1, and the error bound holds with d = 1, G = 2/rho.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from rlsopt.core.errors import InputError
from rlsopt.core.problem import (
    AllSpace,
    InstanceMetadata,
    LinearFunction,
    ProblemInstance,
    Vector,
)

lg = logging.getLogger(__name__)

RING_SIDES = 20
RING_F_STAR = -1.0


def build_ring_lp(rho: float) -> ProblemInstance:
    rho = float(rho)
    if not rho > 0 or not math.isfinite(rho):
        raise InputError(f"rho must be positive, got {rho}")
    constraints = tuple(
        LinearFunction(
            c=[rho * math.cos(i * math.pi / 10), rho * math.sin(i * math.pi / 10)],
            b=-rho,
        )
        for i in range(RING_SIDES)
    )
    metadata = InstanceMetadata(
        f_star=RING_F_STAR,
        x_star=np.array([1.0, 0.0]),
        ebc_d=1.0,
        ebc_G=2.0 / rho,
        subgrad_bound_M=max(1.0, rho),
        smooth_L=0.0,
        strictly_feasible_point=np.zeros(2),
    )
    return ProblemInstance(
        objective=LinearFunction(c=[-1.0, 0.0], b=0.0),
        constraints=constraints,
        feasible_set=AllSpace(),
        metadata=metadata,
        name=f"ring-lp(rho={rho:g})",
    )


def ring_theta(rho: float) -> float:
    """Condition measure of the ring LP, rho / (1 + rho)."""
    return rho / (1.0 + rho)


@dataclass(frozen=True)
class GridSpec:
    """Rectangle [x_lo, x_hi] x [y_lo, y_hi] sampled at resolution^2 points."""

    bounds: tuple[tuple[float, float], tuple[float, float]] = ((-2.0, 2.0), (-2.0, 2.0))
    resolution: int = 2001
    chunk_rows: int = 128

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise InputError("grid resolution must be at least 2")
        for lo, hi in self.bounds:
            if not lo < hi:
                raise InputError(f"empty grid interval [{lo}, {hi}]")

    @property
    def axes(self) -> tuple[Vector, Vector]:
        (x_lo, x_hi), (y_lo, y_hi) = self.bounds
        return (
            np.linspace(x_lo, x_hi, self.resolution),
            np.linspace(y_lo, y_hi, self.resolution),
        )

    @property
    def step(self) -> float:
        return max(hi - lo for lo, hi in self.bounds) / (self.resolution - 1)


def _chunk_min(instance: ProblemInstance, r: float, xs: Vector, ys: Vector) -> tuple[float, Vector]:
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([gx.ravel(), gy.ravel()])
    values = instance.objective.value_batch(points) - r
    for fn in instance.constraints:
        np.maximum(values, fn.value_batch(points), out=values)
    i = int(np.argmin(values))
    return float(values[i]), points[i]


def grid_minimize(
    instance: ProblemInstance,
    r: float,
    grid: GridSpec | None = None,
    workers: int = 1,
) -> tuple[float, Vector]:
    """Minimum of P(.; r) over the grid and a point achieving it.

    Chunks are reduced in row order, so the result does not depend on
    *workers*.
    """
    if instance.dimension != 2:
        raise InputError(f"grid oracle needs a 2-D instance, got dimension {instance.dimension}")
    grid = GridSpec() if grid is None else grid
    xs, ys = grid.axes
    chunks = [xs[i : i + grid.chunk_rows] for i in range(0, len(xs), grid.chunk_rows)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _chunk_min(instance, r, c, ys), chunks))
    else:
        results = [_chunk_min(instance, r, c, ys) for c in chunks]

    best_value, best_point = results[0]
    for value, point in results[1:]:
        if value < best_value:
            best_value, best_point = value, point
    return best_value, best_point.copy()


def brute_force_H(instance: ProblemInstance, r: float, grid: GridSpec | None = None) -> float:
    """Grid estimate of H(r) = min_x P(x; r)."""
    return grid_minimize(instance, r, grid)[0]


def estimate_theta(
    instance: ProblemInstance,
    rs: Iterable[float],
    grid: GridSpec | None = None,
    f_star: float | None = None,
) -> float:
    """min over r < f* of H(r) / (f* - r)."""
    f_star = instance.metadata.f_star if f_star is None else f_star
    if f_star is None:
        raise InputError("estimate_theta needs f*")
    ratios = []
    for r in rs:
        if not r < f_star:
            raise InputError(f"r = {r} is not below f* = {f_star}")
        ratios.append(brute_force_H(instance, r, grid) / (f_star - r))
    if not ratios:
        raise InputError("no level parameters given")
    theta = min(ratios)
    lg.debug("theta estimate %.6g over %d levels", theta, len(ratios))
    return theta
