"""Typed failure conditions shared across the package.

Planner failures always carry a machine-readable `reason` slug so callers
(and the CLI exit-code mapping) can distinguish infeasibility classes without
parsing message text.
"""

from __future__ import annotations


class ScenarioError(ValueError):
    """Malformed scenario input (unknown key, bad cell, bad fault spec)."""


class InfeasibleTargetError(Exception):
    """No fault placement on the footprint reaches a non-negative margin."""


class PlanningError(Exception):
    reason = "planning"

    def __init__(self, msg: str, **info):
        super().__init__(msg)
        self.info = info


class NoPathError(PlanningError):
    """Goal unreachable; `blocking` holds obstacle cells that refused expansions."""

    reason = "no-path"

    def __init__(self, msg: str, blocking: frozenset = frozenset(), **info):
        super().__init__(msg, **info)
        self.blocking = blocking


class NoFeasibleDonorError(PlanningError):
    reason = "no-feasible-donor"


class NoVmcsPlacementError(PlanningError):
    reason = "no-vmcs-placement"


class InfeasibleAssignmentError(PlanningError):
    reason = "infeasible-assignment"


class SafetyViolationError(PlanningError):
    reason = "safety-violation"


class VmcsSearchError(PlanningError):
    reason = "vmcs-search-exhausted"
