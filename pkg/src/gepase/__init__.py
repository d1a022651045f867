"""Parallel bounded-suboptimal search (wA*, w-PA*SE, w-ePA*SE, w-GePA*SE)
with a 2D grid-world benchmark."""

from .core import (
    DUMMY,
    Action,
    ActionClass,
    BeQueue,
    EdgeKey,
    Membership,
    OpenQueue,
    Path,
    PlannerConfig,
    StateRecord,
)
from .planners import (
    PLANNERS,
    SearchMonitor,
    SearchResult,
    SearchStats,
    Status,
    plan_epase,
    plan_gepase,
    plan_pase,
    plan_wastar,
)

__all__ = [
    "DUMMY",
    "Action",
    "ActionClass",
    "BeQueue",
    "EdgeKey",
    "Membership",
    "OpenQueue",
    "Path",
    "PlannerConfig",
    "StateRecord",
    "PLANNERS",
    "SearchMonitor",
    "SearchResult",
    "SearchStats",
    "Status",
    "plan_epase",
    "plan_gepase",
    "plan_pase",
    "plan_wastar",
]
