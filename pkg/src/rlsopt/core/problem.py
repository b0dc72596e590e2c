"""Constrained convex problem instances.

A problem is ``min f0(x) s.t. f_i(x) <= 0, x in X`` where every f_i is one
of three convex function variants with exact value and subgradient oracles,
and X is a simple set with a closed-form projection.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

import numpy as np
import numpy.typing as npt

from rlsopt.core.errors import InputError

lg = logging.getLogger(__name__)

Vector = npt.NDArray[np.float64]

# Points this close (relative) to the ball boundary count as inside, so that
# projecting a projected point returns it unchanged.
_BALL_SLACK = 1e-12

# Tolerance for the metadata consistency checks.
_META_TOL = 1e-9


def as_point(x: Any, dimension: int) -> Vector:
    """Return *x* as a finite float vector of length *dimension*."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != dimension:
        raise InputError(f"expected a vector of dimension {dimension}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point has non-finite entries")
    return arr


def _frozen(values: Any, ndim: int, name: str) -> Vector:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise InputError(f"{name} must have {ndim} dimension(s), got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


# -- convex functions ---------------------------------------------------------


class ConvexFunction(Protocol):
    """Value and subgradient oracle of a convex function on R^n."""

    kind: str

    @property
    def dimension(self) -> int: ...
    def value(self, x: Vector) -> float: ...
    def value_batch(self, X: npt.NDArray[np.float64]) -> Vector: ...
    def subgradient(self, x: Vector) -> Vector: ...
    def to_dict(self) -> dict[str, Any]: ...


@dataclass(frozen=True, eq=False)
class LinearFunction:
    """c.x + b"""

    c: Vector
    b: float = 0.0
    kind: str = field(default="linear", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _frozen(self.c, 1, "c"))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dimension(self) -> int:
        return self.c.shape[0]

    def value(self, x: Vector) -> float:
        return float(self.c @ x + self.b)

    def value_batch(self, X: npt.NDArray[np.float64]) -> Vector:
        return X @ self.c + self.b

    def subgradient(self, x: Vector) -> Vector:
        return self.c.copy()

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "c": self.c.tolist(), "b": self.b}


@dataclass(frozen=True, eq=False)
class HingeAggregate:
    """sum_j w_j * max(0, a_j.x + b_j) with w_j >= 0.

    At a kink (a_j.x + b_j == 0) the zero branch is taken.
    """

    weights: Vector
    directions: npt.NDArray[np.float64]
    offsets: Vector
    kind: str = field(default="hinge-aggregate", init=False)

    def __post_init__(self) -> None:
        weights = _frozen(self.weights, 1, "weights")
        directions = _frozen(self.directions, 2, "directions")
        offsets = _frozen(self.offsets, 1, "offsets")
        if not (weights.shape[0] == directions.shape[0] == offsets.shape[0]):
            raise InputError("hinge weights, directions and offsets must have the same length")
        if np.any(weights < 0):
            raise InputError("hinge weights must be non-negative")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "offsets", offsets)

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    def value(self, x: Vector) -> float:
        z = self.directions @ x + self.offsets
        return float(self.weights @ np.maximum(z, 0.0))

    def value_batch(self, X: npt.NDArray[np.float64]) -> Vector:
        z = X @ self.directions.T + self.offsets
        return np.maximum(z, 0.0) @ self.weights

    def subgradient(self, x: Vector) -> Vector:
        z = self.directions @ x + self.offsets
        active = np.where(z > 0.0, self.weights, 0.0)
        return self.directions.T @ active

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "directions": self.directions.tolist(),
            "offsets": self.offsets.tolist(),
        }


@dataclass(frozen=True, eq=False)
class ScaledSum:
    """sum_j s_j * f_j(x) with s_j >= 0."""

    terms: tuple[tuple[float, ConvexFunction], ...]
    kind: str = field(default="scaled-sum", init=False)

    def __post_init__(self) -> None:
        terms = tuple((float(s), f) for s, f in self.terms)
        if not terms:
            raise InputError("scaled-sum needs at least one term")
        if any(s < 0 or not math.isfinite(s) for s, _ in terms):
            raise InputError("scaled-sum scales must be finite and non-negative")
        if len({f.dimension for _, f in terms}) != 1:
            raise InputError("scaled-sum terms must share one dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def dimension(self) -> int:
        return self.terms[0][1].dimension

    def value(self, x: Vector) -> float:
        return float(sum(s * f.value(x) for s, f in self.terms))

    def value_batch(self, X: npt.NDArray[np.float64]) -> Vector:
        out = np.zeros(X.shape[0])
        for s, f in self.terms:
            out += s * f.value_batch(X)
        return out

    def subgradient(self, x: Vector) -> Vector:
        out = np.zeros(self.dimension)
        for s, f in self.terms:
            out += s * f.subgradient(x)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "terms": [{"scale": s, "function": f.to_dict()} for s, f in self.terms],
        }


# -- feasible sets ------------------------------------------------------------


class FeasibleSet(Protocol):
    """Simple closed convex set with an exact Euclidean projection."""

    kind: str

    def project(self, x: Vector) -> Vector: ...
    def contains(self, x: Vector, tol: float = 0.0) -> bool: ...
    def to_dict(self) -> dict[str, Any]: ...


@dataclass(frozen=True)
class AllSpace:
    kind: str = field(default="all-space", init=False)

    def project(self, x: Vector) -> Vector:
        return x.copy()

    def contains(self, x: Vector, tol: float = 0.0) -> bool:
        return True

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class Box:
    lower: Vector
    upper: Vector
    kind: str = field(default="box", init=False)

    def __post_init__(self) -> None:
        lower = np.array(self.lower, dtype=np.float64)
        upper = np.array(self.upper, dtype=np.float64)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise InputError("box bounds must be vectors of the same length")
        if np.any(lower > upper):
            raise InputError("box lower bound exceeds upper bound")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def project(self, x: Vector) -> Vector:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: Vector, tol: float = 0.0) -> bool:
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball:
    center: Vector
    radius: float
    kind: str = field(default="ball", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _frozen(self.center, 1, "center"))
        radius = float(self.radius)
        if not radius > 0 or not math.isfinite(radius):
            raise InputError("ball radius must be positive")
        object.__setattr__(self, "radius", radius)

    def project(self, x: Vector) -> Vector:
        offset = x - self.center
        dist = float(np.linalg.norm(offset))
        if dist <= self.radius * (1.0 + _BALL_SLACK):
            return x.copy()
        return self.center + offset * (self.radius / dist)

    def contains(self, x: Vector, tol: float = 0.0) -> bool:
        return float(np.linalg.norm(x - self.center)) <= self.radius * (1.0 + _BALL_SLACK) + tol

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


# -- instances ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InstanceMetadata:
    """Optional ground truth and growth constants of an instance."""

    f_star: float | None = None
    x_star: Vector | None = None
    ebc_d: float | None = None
    ebc_G: float | None = None
    subgrad_bound_M: float | None = None
    smooth_L: float | None = None
    strictly_feasible_point: Vector | None = None

    def __post_init__(self) -> None:
        for name in ("x_star", "strictly_feasible_point"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(value, 1, name))
        if self.ebc_d is not None and self.ebc_d < 1:
            raise InputError("ebc_d must be >= 1")
        for name in ("ebc_G", "subgrad_bound_M"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InputError(f"{name} must be positive")
        if self.smooth_L is not None and self.smooth_L < 0:
            raise InputError("smooth_L must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name in (
            "f_star", "x_star", "ebc_d", "ebc_G",
            "subgrad_bound_M", "smooth_L", "strictly_feasible_point",
        ):
            value = getattr(self, name)
            if value is not None:
                out[name] = value.tolist() if isinstance(value, np.ndarray) else value
        return out


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """min f0(x) s.t. max_i f_i(x) <= 0, x in the feasible set."""

    objective: ConvexFunction
    constraints: tuple[ConvexFunction, ...]
    feasible_set: FeasibleSet
    metadata: InstanceMetadata = field(default_factory=InstanceMetadata)
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))
        n = self.objective.dimension
        for i, fn in enumerate(self.constraints):
            if fn.dimension != n:
                raise InputError(f"constraint {i} has dimension {fn.dimension}, objective has {n}")
        meta = self.metadata
        x_tilde = meta.strictly_feasible_point
        if x_tilde is not None:
            x_tilde = as_point(x_tilde, n)
            if not np.array_equal(self.feasible_set.project(x_tilde), x_tilde):
                raise InputError("strictly feasible point lies outside the feasible set")
            if not eval_max_constraint(self, x_tilde)[0] < 0:
                raise InputError("strictly feasible point violates g(x) < 0")
        if meta.x_star is not None and meta.f_star is not None:
            x_star = as_point(meta.x_star, n)
            if abs(self.objective.value(x_star) - meta.f_star) > _META_TOL:
                raise InputError("f0(x_star) does not match f_star")
            if eval_max_constraint(self, x_star)[0] > _META_TOL:
                raise InputError("x_star is infeasible")

    @property
    def dimension(self) -> int:
        return self.objective.dimension

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def components(self) -> tuple[ConvexFunction, ...]:
        """f0 followed by f1..fm."""
        return (self.objective, *self.constraints)


def project(feasible_set: FeasibleSet, x: Any, dimension: int | None = None) -> Vector:
    """Euclidean projection of *x* onto *feasible_set*."""
    arr = np.asarray(x, dtype=np.float64)
    if dimension is not None:
        arr = as_point(arr, dimension)
    elif isinstance(feasible_set, (Box, Ball)):
        ref = feasible_set.lower if isinstance(feasible_set, Box) else feasible_set.center
        arr = as_point(arr, ref.shape[0])
    else:
        arr = as_point(arr, arr.shape[0] if arr.ndim == 1 else -1)
    return feasible_set.project(arr)


def eval_objective(instance: ProblemInstance, x: Any) -> float:
    """f0(x)."""
    return instance.objective.value(as_point(x, instance.dimension))


def constraint_values(instance: ProblemInstance, x: Any) -> Vector:
    """Vector (f1(x), ..., fm(x)); empty when m = 0."""
    point = as_point(x, instance.dimension)
    return np.array([fn.value(point) for fn in instance.constraints], dtype=np.float64)


def eval_max_constraint(instance: ProblemInstance, x: Any) -> tuple[float, int]:
    """g(x) and the smallest achieving index; (-inf, -1) when m = 0."""
    values = constraint_values(instance, x)
    if values.size == 0:
        return -math.inf, -1
    index = int(np.argmax(values))
    return float(values[index]), index


# -- JSON format --------------------------------------------------------------


def function_from_dict(data: dict[str, Any]) -> ConvexFunction:
    kind = data.get("kind")
    try:
        if kind == "linear":
            return LinearFunction(c=data["c"], b=data.get("b", 0.0))
        if kind == "hinge-aggregate":
            return HingeAggregate(
                weights=data["weights"],
                directions=data["directions"],
                offsets=data["offsets"],
            )
        if kind == "scaled-sum":
            return ScaledSum(
                terms=tuple(
                    (term["scale"], function_from_dict(term["function"]))
                    for term in data["terms"]
                )
            )
    except KeyError as exc:
        raise InputError(f"{kind} function is missing field {exc}") from exc
    raise InputError(f"unknown function kind: {kind!r}")


def set_from_dict(data: dict[str, Any], dimension: int) -> FeasibleSet:
    kind = data.get("kind", "all-space")
    try:
        if kind == "all-space":
            return AllSpace()
        if kind == "box":
            box = Box(lower=data["lower"], upper=data["upper"])
            if box.lower.shape[0] != dimension:
                raise InputError("box bounds do not match the problem dimension")
            return box
        if kind == "ball":
            center = data.get("center", [0.0] * dimension)
            ball = Ball(center=center, radius=data["radius"])
            if ball.center.shape[0] != dimension:
                raise InputError("ball center does not match the problem dimension")
            return ball
    except KeyError as exc:
        raise InputError(f"{kind} set is missing field {exc}") from exc
    raise InputError(f"unknown set kind: {kind!r}")


def problem_from_dict(data: dict[str, Any]) -> ProblemInstance:
    """Build an instance from its JSON-compatible description."""
    if "objective" not in data:
        raise InputError("problem description has no objective")
    objective = function_from_dict(data["objective"])
    dimension = int(data.get("dimension", objective.dimension))
    if dimension != objective.dimension:
        raise InputError(f"declared dimension {dimension} does not match the objective")
    constraints = tuple(function_from_dict(c) for c in data.get("constraints", []))
    feasible_set = set_from_dict(data.get("set", {}), dimension)
    try:
        metadata = InstanceMetadata(**data.get("metadata", {}))
    except TypeError as exc:
        raise InputError(f"bad metadata: {exc}") from exc
    return ProblemInstance(
        objective=objective,
        constraints=constraints,
        feasible_set=feasible_set,
        metadata=metadata,
        name=data.get("name", ""),
    )


def problem_to_dict(instance: ProblemInstance) -> dict[str, Any]:
    return {
        "name": instance.name,
        "dimension": instance.dimension,
        "objective": instance.objective.to_dict(),
        "constraints": [c.to_dict() for c in instance.constraints],
        "set": instance.feasible_set.to_dict(),
        "metadata": instance.metadata.to_dict(),
    }


def load_problem(path: str | Path) -> ProblemInstance:
    """Read a problem description from a JSON file."""
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON: {exc}") from exc
    lg.debug("loaded problem description from %s", p)
    return problem_from_dict(data)
