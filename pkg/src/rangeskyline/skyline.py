"""Multi-criteria dominance and range-skyline computation over object snapshots.

Objects compare on Euclidean distance to a query point plus a vector of
non-spatial attributes.  Dominance is strict Pareto dominance on the combined
(distance, attributes) vector: no worse everywhere, strictly better somewhere.
Fully equivalent objects do not dominate each other, so both stay in a skyline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MINIMIZE = "min"
MAXIMIZE = "max"


@dataclass(frozen=True)
class AttributeVector:
    """Non-spatial attribute values with per-dimension preference directions.

    Lower is better by default; a dimension marked MAXIMIZE is negated before
    comparison.  All values must be finite.
    """

    values: tuple[float, ...]
    directions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.values) < 1:
            raise ValueError("attribute vector needs at least one dimension")
        dirs = self.directions or tuple(MINIMIZE for _ in self.values)
        if len(dirs) != len(self.values):
            raise ValueError("directions length must match values length")
        for d in dirs:
            if d not in (MINIMIZE, MAXIMIZE):
                raise ValueError(f"unknown direction {d!r}")
        for v in self.values:
            if not math.isfinite(v):
                raise ValueError("attribute values must be finite")
        object.__setattr__(self, "directions", dirs)

    def canonical(self) -> tuple[float, ...]:
        """Values with maximize dimensions negated, so lower is always better."""
        return tuple(
            -v if d == MAXIMIZE else v for v, d in zip(self.values, self.directions)
        )


@dataclass(frozen=True)
class DataObject:
    """One mobile sensor node's record: identity, motion snapshot, sensed data."""

    id: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    attrs: AttributeVector
    observed_at: float = 0.0

    def __post_init__(self) -> None:
        if self.observed_at < 0:
            raise ValueError("observed_at must be >= 0")

    def position_at(self, t: float) -> tuple[float, float]:
        """Linear extrapolation of the carried motion state to time t."""
        dt = t - self.observed_at
        return (
            self.position[0] + self.velocity[0] * dt,
            self.position[1] + self.velocity[1] * dt,
        )


@dataclass(frozen=True)
class QuerySnapshot:
    """A query point with its search radius."""

    q_position: tuple[float, float]
    range_R: float

    def __post_init__(self) -> None:
        if self.range_R <= 0:
            raise ValueError("range_R must be > 0")


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def non_spatial_dominates(a: AttributeVector, b: AttributeVector) -> bool:
    """True iff a is no worse than b in every attribute dimension.

    Equal vectors satisfy this; strictness is resolved at the combined
    (distance, attrs) level in dominates_wrt.
    """
    if len(a.values) != len(b.values):
        raise ValueError("attribute dimensionality mismatch")
    if a.directions != b.directions:
        raise ValueError("attribute direction mismatch")
    return all(x <= y for x, y in zip(a.canonical(), b.canonical()))


def dominates_wrt(q: QuerySnapshot, a: DataObject, b: DataObject) -> bool:
    """True iff a dominates b with respect to the query point q.

    Requires a no worse than b in all attributes, no farther from q, and
    strictly better in at least one component of the combined vector.
    """
    if not non_spatial_dominates(a.attrs, b.attrs):
        return False
    da = distance(q.q_position, a.position)
    db = distance(q.q_position, b.position)
    if da > db:
        return False
    return da < db or a.attrs.canonical() != b.attrs.canonical()


def point_skyline(q: QuerySnapshot, objs: set[DataObject]) -> set[DataObject]:
    """Objects not dominated by any other input object w.r.t. q."""
    items = list(objs)
    out: set[DataObject] = set()
    for o in items:
        if not any(other is not o and dominates_wrt(q, other, o) for other in items):
            out.add(o)
    return out


def in_range(q: QuerySnapshot, obj: DataObject) -> bool:
    """Closed-ball membership test against the query radius."""
    return distance(q.q_position, obj.position) <= q.range_R


def range_skyline(q: QuerySnapshot, objs: set[DataObject]) -> set[DataObject]:
    """Skyline of the objects inside the query range.

    Range pruning happens before any dominance check, so an out-of-range
    object can never eliminate an in-range one.
    """
    return point_skyline(q, {o for o in objs if in_range(q, o)})


def merge_prune(
    q: QuerySnapshot, partials: list[set[DataObject]]
) -> set[DataObject]:
    """Merge partial skyline sets into the final range-skyline.

    Duplicated ids are collapsed to the record with the newest observed_at,
    out-of-range records are discarded, and the survivors are dominance
    filtered.  Equals range_skyline of the deduplicated union.
    """
    newest: dict[int, DataObject] = {}
    for part in partials:
        for o in part:
            kept = newest.get(o.id)
            if kept is None or o.observed_at > kept.observed_at:
                newest[o.id] = o
    return range_skyline(q, set(newest.values()))
