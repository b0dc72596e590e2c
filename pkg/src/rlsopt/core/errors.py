"""Exceptions raised by the solver library."""

from __future__ import annotations


class InputError(ValueError):
    """Invalid argument: dimension, range or precondition violation."""


class ConfigError(InputError):
    """Invalid run configuration."""


class SolverError(RuntimeError):
    """The solver could not complete (safety cap, no feasible candidate)."""


class LineSearchError(SolverError):
    """The APG line search exceeded its growth cap."""

    def __init__(self, l_hat: float, trials: int) -> None:
        super().__init__(f"line search diverged after {trials} trials (L_hat={l_hat:.6g})")
        self.l_hat = l_hat
        self.trials = trials
