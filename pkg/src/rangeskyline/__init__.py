"""Distributed range-skyline query processing over mobile sensor networks.

A deterministic discrete-event simulator and library for snapshot and
continuous range-skyline queries answered cooperatively by moving nodes,
with a centralized flooding baseline, a closed-form network-cost model,
and an experiment harness producing CSV metrics.
"""

from rangeskyline.skyline import (
    AttributeVector,
    DataObject,
    QuerySnapshot,
    dominates_wrt,
    merge_prune,
    non_spatial_dominates,
    point_skyline,
    range_skyline,
)
from rangeskyline.kinematics import (
    MotionState,
    SafeInterval,
    WaypointPlan,
    monitoring_interval,
    position_at,
    rwp_step,
    safe_interval,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeVector",
    "DataObject",
    "QuerySnapshot",
    "MotionState",
    "SafeInterval",
    "WaypointPlan",
    "dominates_wrt",
    "merge_prune",
    "monitoring_interval",
    "non_spatial_dominates",
    "point_skyline",
    "position_at",
    "range_skyline",
    "rwp_step",
    "safe_interval",
]
