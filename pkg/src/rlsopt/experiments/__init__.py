"""Experiment instances, oracles and metrics."""

from rlsopt.experiments.fairness import (
    FairnessDataset,
    build_fairness_instance,
    generate_synthetic_fairness,
    load_fairness_csv,
    tune_fairness,
    warm_start_feasible,
)
from rlsopt.experiments.metrics import (
    count_data_pass,
    critical_index,
    estimate_fstar,
    first_hit,
)
from rlsopt.experiments.ringlp import (
    GridSpec,
    brute_force_H,
    build_ring_lp,
    estimate_theta,
    grid_minimize,
)

__all__ = [
    "FairnessDataset",
    "GridSpec",
    "brute_force_H",
    "build_fairness_instance",
    "build_ring_lp",
    "count_data_pass",
    "critical_index",
    "estimate_fstar",
    "estimate_theta",
    "first_hit",
    "generate_synthetic_fairness",
    "grid_minimize",
    "load_fairness_csv",
    "tune_fairness",
    "warm_start_feasible",
]
