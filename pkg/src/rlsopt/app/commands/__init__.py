"""Runner command modules."""

from rlsopt.app.commands import bench, fairness, solve

COMMAND_MODULES = [bench, fairness, solve]
