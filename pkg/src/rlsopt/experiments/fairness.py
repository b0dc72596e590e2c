"""Fairness-constrained linear classification.

Hinge-loss classifier over one half of the data; the other half feeds two
convex surrogates of the rule "each group's positive rate is at least kappa
times the other's". Both constraints are stored minus one, so feasibility
reads g(x) <= 0. The classifier lives in the ball of radius lambda.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import numpy.typing as npt
import pandas as pd

from rlsopt.core.errors import InputError
from rlsopt.core.levelset import eval_P
from rlsopt.core.problem import (
    Ball,
    HingeAggregate,
    InstanceMetadata,
    LinearFunction,
    ProblemInstance,
    ScaledSum,
    Vector,
    as_point,
    eval_max_constraint,
)
from rlsopt.core.rls import SolverConfig, SolverReport, rls_run

lg = logging.getLogger(__name__)

GROUP_M = "M"
GROUP_F = "F"

DEFAULT_KAPPA = 0.9
DEFAULT_LAMBDA = 10.0
TUNE_ALPHAS = (0.3, 0.5, 0.9)
TUNE_BS = (0.9, 0.95, 0.99)
WARM_START_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class FairnessDataset:
    features: npt.NDArray[np.float64]
    labels: Vector
    group: npt.NDArray[np.str_]

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.float64)
        group = np.array(self.group, dtype=str)
        if features.ndim != 2:
            raise InputError("features must be an n x p matrix")
        n = features.shape[0]
        if labels.shape != (n,) or group.shape != (n,):
            raise InputError("labels and group must have one entry per row")
        if not np.all(np.isfinite(features)):
            raise InputError("features have non-finite entries")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise InputError("labels must be +1 or -1")
        if not np.all(np.isin(group, (GROUP_M, GROUP_F))):
            raise InputError("group values must be 'M' or 'F'")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "group", group)
        if self.n_M < 1 or self.n_F < 1:
            raise InputError("both groups need at least one member")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def n_M(self) -> int:
        return int(np.sum(self.group == GROUP_M))

    @property
    def n_F(self) -> int:
        return int(np.sum(self.group == GROUP_F))

    def subset(self, index: npt.NDArray[np.int64]) -> tuple[np.ndarray, Vector, np.ndarray]:
        return self.features[index], self.labels[index], self.group[index]


def generate_synthetic_fairness(
    n: int,
    p: int,
    seed: int,
    shift: float = 1.0,
    noise: float = 0.25,
) -> FairnessDataset:
    """Seeded data with a planted linear rule and a base-rate gap between groups.

    Group M is shifted along the planted direction, so it has more positives
    and an unconstrained classifier is unfair to F.
    """
    if n < 4:
        raise InputError("need n >= 4")
    if p < 1:
        raise InputError("need p >= 1")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(p)
    w /= np.linalg.norm(w)

    is_m = rng.random(n) < 0.5
    # at least two members per group
    is_m[:2] = True
    is_m[2:4] = False
    is_m = rng.permutation(is_m)

    features = rng.standard_normal((n, p))
    features[is_m] += shift * w
    score = features @ w + noise * rng.standard_normal(n)
    labels = np.where(score >= 0, 1.0, -1.0)
    group = np.where(is_m, GROUP_M, GROUP_F)
    return FairnessDataset(features=features, labels=labels, group=group)


@dataclass(frozen=True)
class FairnessSplit:
    objective_index: npt.NDArray[np.int64]
    constraint_index: npt.NDArray[np.int64]


def split_by_group(dataset: FairnessDataset, split_seed: int) -> FairnessSplit:
    """Half of each group to the objective, the rest to the constraints."""
    rng = np.random.default_rng(split_seed)
    objective, constraint = [], []
    for name in (GROUP_M, GROUP_F):
        members = rng.permutation(np.flatnonzero(dataset.group == name))
        half = len(members) // 2
        if half == 0 or half == len(members):
            raise InputError(f"degenerate split: group {name} has {len(members)} member(s)")
        objective.append(members[:half])
        constraint.append(members[half:])
    return FairnessSplit(
        objective_index=np.sort(np.concatenate(objective)),
        constraint_index=np.sort(np.concatenate(constraint)),
    )


def _fairness_constraint(
    A_up: np.ndarray, A_down: np.ndarray, kappa: float
) -> ScaledSum:
    # kappa/n_up sum (a.x + 0.5)_+ + 1/n_down sum (-a.x + 0.5)_+ - 1
    n_up, n_down = A_up.shape[0], A_down.shape[0]
    hinge = HingeAggregate(
        weights=np.concatenate([np.full(n_up, kappa / n_up), np.full(n_down, 1.0 / n_down)]),
        directions=np.vstack([A_up, -A_down]),
        offsets=np.full(n_up + n_down, 0.5),
    )
    # the weights need not sum exactly; keep g(0) <= 0 for kappa <= 1
    h0 = hinge.value(np.zeros(A_up.shape[1]))
    constant = LinearFunction(c=np.zeros(A_up.shape[1]), b=-max(1.0, h0))
    return ScaledSum(terms=((1.0, hinge), (1.0, constant)))


def build_fairness_instance(
    dataset: FairnessDataset,
    kappa: float = DEFAULT_KAPPA,
    lam: float = DEFAULT_LAMBDA,
    split_seed: int = 0,
    literal_hinge: bool = False,
) -> ProblemInstance:
    """Hinge-loss objective with the two fairness constraints on a ball.

    The objective is mean (1 - b a.x)_+; ``literal_hinge`` switches to
    (1 + b a.x)_+.
    """
    if not 0.0 < kappa <= 1.0:
        raise InputError(f"kappa must lie in (0, 1], got {kappa}")
    if not lam > 0:
        raise InputError(f"lambda must be positive, got {lam}")
    split = split_by_group(dataset, split_seed)

    A_obj, b_obj, _ = dataset.subset(split.objective_index)
    sign = 1.0 if literal_hinge else -1.0
    objective = HingeAggregate(
        weights=np.full(len(b_obj), 1.0 / len(b_obj)),
        directions=sign * b_obj[:, None] * A_obj,
        offsets=np.ones(len(b_obj)),
    )

    A_con, _, g_con = dataset.subset(split.constraint_index)
    A_M = A_con[g_con == GROUP_M]
    A_F = A_con[g_con == GROUP_F]
    constraints = (
        _fairness_constraint(A_M, A_F, kappa),
        _fairness_constraint(A_F, A_M, kappa),
    )
    lg.debug(
        "fairness instance: %d objective rows, %d/%d constraint rows (M/F)",
        len(b_obj), len(A_M), len(A_F),
    )
    return ProblemInstance(
        objective=objective,
        constraints=constraints,
        feasible_set=Ball(center=np.zeros(dataset.p), radius=lam),
        metadata=InstanceMetadata(),
        name=f"fairness(n={dataset.n}, p={dataset.p}, kappa={kappa:g})",
    )


def warm_start_feasible(
    instance: ProblemInstance,
    iterations: int = 40,
    x0: Any = None,
    depth: float = 1.5,
) -> Vector:
    """Subgradient descent on g alone with a Polyak step toward a moving target.

    Each trial steps from the best point so far toward best_g - gap, with
    step (g - target) / ||xi||^2. The gap starts at depth * |g(x0)| and is
    halved after every trial that does not lower g, so the step does not
    vanish with g. The result is not guaranteed to be strictly feasible;
    callers check g < 0.
    """
    if instance.num_constraints == 0:
        raise InputError("warm start needs at least one constraint")
    if not depth > 0:
        raise InputError(f"depth must be positive, got {depth}")
    project = instance.feasible_set.project
    best_x = project(np.zeros(instance.dimension) if x0 is None else as_point(x0, instance.dimension))
    best_g, index = eval_max_constraint(instance, best_x)
    gap = depth * max(abs(best_g), WARM_START_FLOOR)
    for _ in range(iterations):
        xi = instance.constraints[index].subgradient(best_x)
        norm2 = float(xi @ xi)
        if norm2 == 0.0:
            break
        x = project(best_x - (gap / norm2) * xi)
        g, trial_index = eval_max_constraint(instance, x)
        if g < best_g:
            best_x, best_g, index = x, g, trial_index
        else:
            gap /= 2
    lg.debug("warm start: g = %.6g after %d iterations", best_g, iterations)
    return best_x.copy()


def _parse_mapping(mapping: Mapping[str, Any] | None, column: str, kind: str) -> dict[str, Any]:
    if not mapping:
        raise InputError(f"{kind} column {column!r} needs an explicit value mapping")
    return {str(k): v for k, v in mapping.items()}


def load_fairness_csv(
    path: str | Path,
    label_col: str,
    group_col: str,
    label_map: Mapping[str, Any],
    group_map: Mapping[str, Any],
) -> FairnessDataset:
    """Read a headed CSV; every column but label and group must be numeric."""
    df = pd.read_csv(path)
    for column in (label_col, group_col):
        if column not in df.columns:
            raise InputError(f"column {column!r} not found in {path}")
    labels_map = label_targets(_parse_mapping(label_map, label_col, "label"))
    groups_map = _parse_mapping(group_map, group_col, "group")
    bad = sorted({str(v) for v in groups_map.values()} - {GROUP_M, GROUP_F})
    if bad:
        raise InputError(f"group targets must be M or F, got {bad}")

    labels = df[label_col].astype(str).map(labels_map)
    if labels.isna().any():
        missing = sorted(set(df[label_col].astype(str)[labels.isna()]))
        raise InputError(f"label column {label_col!r} has unmapped values: {missing}")
    group = df[group_col].astype(str).map(groups_map)
    if group.isna().any():
        missing = sorted(set(df[group_col].astype(str)[group.isna()]))
        raise InputError(f"group column {group_col!r} has unmapped values: {missing}")

    feature_cols = [c for c in df.columns if c not in (label_col, group_col)]
    if not feature_cols:
        raise InputError(f"{path} has no feature columns")
    for column in feature_cols:
        if not pd.api.types.is_numeric_dtype(df[column]):
            raise InputError(f"feature column {column!r} is not numeric")
    lg.info("loaded %d rows, %d features from %s", len(df), len(feature_cols), path)
    return FairnessDataset(
        features=df[feature_cols].to_numpy(dtype=np.float64),
        labels=labels.to_numpy(dtype=np.float64),
        group=group.astype(str).to_numpy(),
    )


def parse_value_map(text: str) -> dict[str, str]:
    """'yes=1,no=-1' -> {'yes': '1', 'no': '-1'}"""
    out: dict[str, str] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        if "=" not in item:
            raise InputError(f"bad mapping entry {item!r}, expected value=target")
        # values may contain "=", targets do not
        key, value = item.rsplit("=", 1)
        out[key.strip()] = value.strip()
    return out


def label_targets(mapping: Mapping[str, str]) -> dict[str, float]:
    """Map label targets to +1/-1."""
    out = {}
    for key, value in mapping.items():
        try:
            target = float(value)
        except ValueError as exc:
            raise InputError(f"label target {value!r} is not a number") from exc
        if target not in (1.0, -1.0):
            raise InputError(f"label target for {key!r} must be +1 or -1")
        out[key] = target
    return out


# -- tuning -------------------------------------------------------------------


@dataclass(frozen=True)
class TuningResult:
    alpha: float
    B: float
    final_P: float
    report: SolverReport = field(repr=False)


def tune_fairness(
    instance: ProblemInstance,
    x_ini: Any,
    r_ini: float,
    f_star: float,
    base: SolverConfig,
    alphas: Iterable[float] = TUNE_ALPHAS,
    Bs: Iterable[float] = TUNE_BS,
) -> list[TuningResult]:
    """Run every admissible (alpha, B) pair; results sorted by final P(x; f*).

    Fields of *base* other than alpha, B and f* are kept.
    """
    results = []
    for alpha in alphas:
        for B in Bs:
            if not alpha < B:
                continue
            fom = replace(base.fom, alpha=alpha, B=B)
            config = replace(base, fom=fom, f_star=f_star)
            report = rls_run(instance, x_ini, r_ini, config)
            final_P = eval_P(instance, report.x_best, f_star)
            lg.info("alpha=%g B=%g: P(x; f*) = %.6g", alpha, B, final_P)
            results.append(TuningResult(alpha=alpha, B=B, final_P=final_P, report=report))
    if not results:
        raise InputError("no admissible (alpha, B) pair")
    results.sort(key=lambda t: (t.final_P, t.alpha, t.B))
    return results
