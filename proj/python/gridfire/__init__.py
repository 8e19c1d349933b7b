"""Wildfire-aware preemptive de-energization planning.

Thin wrapper around the C++ core: case ingestion, the cellular-automaton
disruption simulator, the two-stage stochastic program and its Lagrangian-cut
decomposition, benchmark models, and plan evaluation.
"""

from gridfire._gridfire import *  # noqa: F401,F403
from gridfire._gridfire import __version__  # noqa: F401
