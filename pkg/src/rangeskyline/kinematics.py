"""Linear motion, safe-time intervals, and random-waypoint trajectories.

The safe interval of a moving object against a moving query center is the
time window during which their distance stays within the query radius.  Both
endpoints come from the roots of a quadratic in relative motion; only the
relative velocity and offset enter, so the interval is symmetric in the two
parties and invariant under common translation.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass

INF = math.inf


@dataclass(frozen=True)
class MotionState:
    """Position and constant velocity valid from a given instant."""

    position: tuple[float, float]
    velocity: tuple[float, float]
    valid_from: float = 0.0

    def speed(self) -> float:
        return math.hypot(*self.velocity)


def position_at(m: MotionState, t: float) -> tuple[float, float]:
    """Linear extrapolation of m to time t; t must not precede valid_from."""
    if t < m.valid_from:
        raise ValueError(f"t={t} precedes valid_from={m.valid_from}")
    dt = t - m.valid_from
    return (m.position[0] + m.velocity[0] * dt, m.position[1] + m.velocity[1] * dt)


@dataclass(frozen=True)
class SafeInterval:
    """In-range time window [enter, leave]; empty when enter > leave.

    leave is +inf for a pair that never separates; enter equals the query
    instant for an object already inside the range.
    """

    enter: float
    leave: float

    @staticmethod
    def empty() -> SafeInterval:
        return SafeInterval(INF, -INF)

    @property
    def is_empty(self) -> bool:
        return self.enter > self.leave

    def contains(self, t: float) -> bool:
        return self.enter <= t <= self.leave

    def intersect(self, other: SafeInterval) -> SafeInterval:
        enter = max(self.enter, other.enter)
        leave = min(self.leave, other.leave)
        if enter > leave:
            return SafeInterval.empty()
        return SafeInterval(enter, leave)

    def duration(self) -> float:
        return 0.0 if self.is_empty else self.leave - self.enter


def safe_interval(
    q: MotionState, s: MotionState, R: float, now: float
) -> SafeInterval:
    """Window of absolute times >= now during which dist(q, s) <= R.

    Solves |dp + dv*t|^2 = R^2 for the relative offset dp and velocity dv at
    `now`.  An object currently in range gets enter == now and leave equal to
    the smallest positive boundary crossing (or +inf if never leaving).
    """
    if R <= 0:
        raise ValueError("R must be > 0")
    qp = position_at(q, now)
    sp = position_at(s, now)
    dpx, dpy = sp[0] - qp[0], sp[1] - qp[1]
    dvx, dvy = s.velocity[0] - q.velocity[0], s.velocity[1] - q.velocity[1]

    a = dvx * dvx + dvy * dvy
    b = 2.0 * (dpx * dvx + dpy * dvy)
    c = dpx * dpx + dpy * dpy - R * R

    if a == 0.0:
        # no relative motion: inside forever or never
        return SafeInterval(now, INF) if c <= 0.0 else SafeInterval.empty()

    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return SafeInterval.empty()
    sq = math.sqrt(disc)
    t1 = (-b - sq) / (2.0 * a)
    t2 = (-b + sq) / (2.0 * a)
    if t2 < 0.0:
        return SafeInterval.empty()
    return SafeInterval(now + max(t1, 0.0), now + t2)


def monitoring_interval(si: SafeInterval, window: tuple[float, float]) -> SafeInterval:
    """Intersection of a safe interval with a monitoring window [t0, t_end]."""
    t0, t_end = window
    if t0 > t_end:
        raise ValueError("window start exceeds window end")
    return si.intersect(SafeInterval(t0, t_end))


@dataclass(frozen=True)
class Leg:
    """One straight-line segment of a waypoint trajectory."""

    t_start: float
    t_end: float
    origin: tuple[float, float]
    velocity: tuple[float, float]

    def position_at(self, t: float) -> tuple[float, float]:
        dt = min(t, self.t_end) - self.t_start
        return (
            self.origin[0] + self.velocity[0] * dt,
            self.origin[1] + self.velocity[1] * dt,
        )


class WaypointPlan:
    """Random-waypoint trajectory: straight legs between uniform waypoints.

    Waypoints are drawn uniformly inside the area, speeds uniformly from the
    configured range, with zero pause time.  The whole trajectory up to the
    horizon is fixed at construction from the seeded generator, so lookups are
    pure and two plans with equal inputs are identical.  speed_max == 0 yields
    a stationary plan.
    """

    def __init__(
        self,
        start: tuple[float, float],
        area: tuple[float, float],
        speed_range: tuple[float, float],
        horizon: float,
        rng: random.Random,
        waypoints: list[tuple[float, float]] | None = None,
        speeds: list[float] | None = None,
    ) -> None:
        self.area = area
        self.horizon = horizon
        self.legs: list[Leg] = []
        lo, hi = speed_range
        t = 0.0
        pos = start
        if hi <= 0.0:
            self.legs.append(Leg(0.0, INF, start, (0.0, 0.0)))
        else:
            fixed_targets = list(waypoints) if waypoints else None
            fixed_speeds = list(speeds) if speeds else None
            idx = 0
            while t < horizon:
                if fixed_targets is not None and idx < len(fixed_targets):
                    target = fixed_targets[idx]
                    speed = (
                        fixed_speeds[idx]
                        if fixed_speeds is not None and idx < len(fixed_speeds)
                        else hi
                    )
                else:
                    target = (rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1]))
                    speed = rng.uniform(lo, hi)
                    while speed <= 0.0:
                        speed = rng.uniform(lo, hi)
                idx += 1
                dist = math.hypot(target[0] - pos[0], target[1] - pos[1])
                if dist == 0.0:
                    continue
                duration = dist / speed
                vel = (
                    (target[0] - pos[0]) / dist * speed,
                    (target[1] - pos[1]) / dist * speed,
                )
                self.legs.append(Leg(t, t + duration, pos, vel))
                t += duration
                pos = target
            if not self.legs:
                self.legs.append(Leg(0.0, INF, start, (0.0, 0.0)))
        self._starts = [leg.t_start for leg in self.legs]

    def leg_index_at(self, t: float) -> int:
        i = bisect_right(self._starts, t) - 1
        return max(i, 0)

    def leg_at(self, t: float) -> Leg:
        return self.legs[self.leg_index_at(t)]

    def position_at(self, t: float) -> tuple[float, float]:
        return self.leg_at(t).position_at(t)

    def motion_state_at(self, t: float) -> MotionState:
        leg = self.leg_at(t)
        if t >= leg.t_end:
            # past the final generated leg: hold position
            return MotionState(leg.position_at(leg.t_end), (0.0, 0.0), t)
        return MotionState(leg.position_at(t), leg.velocity, t)

    def leg_change_times(self, t0: float = 0.0, t1: float | None = None) -> list[float]:
        """Interior leg-boundary instants within [t0, t1]."""
        end = self.horizon if t1 is None else t1
        return [
            leg.t_start
            for leg in self.legs
            if t0 < leg.t_start <= end and leg.t_start > 0.0
        ]


def rwp_step(plan: WaypointPlan, t: float) -> MotionState:
    """Motion state (position, current leg velocity) of the plan at time t."""
    return plan.motion_state_at(t)
