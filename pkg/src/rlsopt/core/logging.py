"""Extra log levels between DEBUG and INFO.

SOLVER carries per-level and restart events, TRACE every FOM iteration.
"""

from __future__ import annotations

import logging

TRACE = 15
SOLVER = 18
logging.addLevelName(TRACE, "TRACE")
logging.addLevelName(SOLVER, "SOLVER")

_VERBOSITY = (logging.INFO, SOLVER, TRACE)

LOG_FORMAT = "%(levelname)-8s %(name)s: %(message)s"


def verbosity_level(count: int) -> int:
    """Map a repeated ``-v`` count to a level: 0 INFO, 1 SOLVER, 2+ TRACE."""
    return _VERBOSITY[min(max(count, 0), len(_VERBOSITY) - 1)]


def configure_logging(verbose: int = 0) -> None:
    logging.basicConfig(level=verbosity_level(verbose), format=LOG_FORMAT)
