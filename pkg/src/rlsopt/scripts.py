"""Console entry point."""

import sys
from typing import Any

import click

from rlsopt.core.logging import configure_logging


def _overrides(**values: Any) -> dict[str, Any]:
    """Flags the user actually gave; unset flags leave config-file values alone."""
    return {k: v for k, v in values.items() if v is not None and v != () and v is not False}


def _run(ctx: click.Context, command: str, **values: Any) -> None:
    from rlsopt.app.main import main

    sys.exit(main(command, ctx.obj["config"], _overrides(**values)))


def solver_options(func):
    options = [
        click.option("--alpha", type=float, help="Level step alpha in (0, B)."),
        click.option("--bigB", "bigB", type=float, help="Restart ratio B in (alpha, 1)."),
        click.option("--eps", type=float, multiple=True, help="Target accuracy (repeatable)."),
        click.option("--gamma", type=float, help="AGM line-search increase factor."),
        click.option("--gamma-d", "gamma_d", type=float, help="AGM smoothness decrease factor."),
        click.option("--mode", type=click.Choice(["sgd", "agm"]), help="First-order method."),
        click.option("--budget", type=int, help="Total FOM iterations."),
        click.option("--pass-budget", "pass_budget", type=int, help="Stop after this many data passes."),
        click.option("--r-ini", "r_ini", type=float, help="Initial level parameter, below f*."),
        click.option("--num-levels", "num_levels", type=int, help="Override the surrogate K."),
        click.option("--workers", type=int, help="Threads for the per-level FOM steps."),
        click.option("--early-exit", "early_exit", is_flag=True, help="Stop once feasible and P <= eps."),
        click.option("--out-trace", "out_trace", type=click.Path(), help="Trace CSV (lp-bench: directory)."),
        click.option("--out-summary", "out_summary", type=click.Path(), help="Summary JSON."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option("-v", "--verbose", count=True, help="-v SOLVER events, -vv every FOM iteration.")
@click.option(
    "-c",
    "--config",
    "config",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of defaults; flags override it.",
)
@click.pass_context
def rlsopt(ctx, verbose, config):
    """Restarting level-set solver for convex constrained problems."""
    configure_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


@rlsopt.command("lp-bench")
@solver_options
@click.option("--rho", type=float, multiple=True, help="Ring radius (repeatable).")
@click.pass_context
def lp_bench(ctx, **values):
    """Ring-LP sweep over rho and eps; one trace CSV per cell."""
    _run(ctx, "lp-bench", **values)


@rlsopt.command()
@solver_options
@click.option("--csv", type=click.Path(exists=True, dir_okay=False), help="Dataset CSV.")
@click.option("--label-col", "label_col", help="Label column name.")
@click.option("--group-col", "group_col", help="Group column name.")
@click.option("--label-map", "label_map", help="Label values, e.g. '>50K=1,<=50K=-1'.")
@click.option("--group-map", "group_map", help="Group values, e.g. 'Male=M,Female=F'.")
@click.option("--synthetic", is_flag=True, help="Use a generated two-group dataset.")
@click.option("--n-samples", "n_samples", type=int, help="Synthetic sample count.")
@click.option("--n-features", "n_features", type=int, help="Synthetic feature count.")
@click.option("--seed", type=int, help="Synthetic data seed.")
@click.option("--split-seed", "split_seed", type=int, help="Group split seed.")
@click.option("--lambda", "lam", type=float, help="Ball radius of the feasible set.")
@click.option("--kappa", type=float, help="Fairness slack.")
@click.option("--literal-hinge", "literal_hinge", is_flag=True, help="Use the +b*a hinge sign.")
@click.option("--warm-start-iters", "warm_start_iters", type=int, help="Feasibility warm-start iterations.")
@click.option("--reference-factor", "reference_factor", type=int, help="Estimate f* with an N-times longer run.")
@click.option("--tune", is_flag=True, help="Grid-search alpha and B first.")
@click.pass_context
def fairness(ctx, **values):
    """Fairness-constrained linear classification."""
    _run(ctx, "fairness", **values)


@rlsopt.command()
@solver_options
@click.option("--problem", type=click.Path(exists=True, dir_okay=False), help="Problem JSON file.")
@click.pass_context
def solve(ctx, **values):
    """Solve a problem described in a JSON file."""
    _run(ctx, "solve", **values)


@rlsopt.command()
@click.option(
    "-f",
    "--file",
    "file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Run commands from a scenario file (REPL when omitted).",
)
@click.pass_context
def run(ctx, file):
    """Scenario file or interactive session."""
    from rlsopt.app.main import run_scenario

    sys.exit(run_scenario(file, ctx.obj["config"]))
