"""Optimal merging-index policy for one autonomous vehicle joining a stream
of human-driven vehicles at a merge point.

The AV picks the slot ``k`` in the HDV stream and a minimum-energy trajectory
into it, trading its own travel time and energy against the disruption it
causes to the HDVs behind it.
"""

from .errors import MergeError, NoFeasiblePlan, ScenarioError
from .policy import MergePlan, optimal_index, optimize_index
from .types import Scenario, make_scenario, validate_scenario

__version__ = "0.1.0"

__all__ = [
    "MergeError",
    "MergePlan",
    "NoFeasiblePlan",
    "Scenario",
    "ScenarioError",
    "make_scenario",
    "optimal_index",
    "optimize_index",
    "validate_scenario",
]
