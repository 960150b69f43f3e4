"""Ground-truth timelines and accuracy scoring for query results.

The oracle recomputes the true range-skyline from complete trajectory
knowledge.  It splits the monitoring window at every leg change, then within
each constant-velocity epoch reuses the same segment machinery the protocol
uses for predictions, but fed with exact states, so its change points cover
range crossings and distance-order flips as well.

Precision and recall compare a realized result timeline against the oracle
instant by instant and integrate over the window.
"""

from __future__ import annotations

from dataclasses import dataclass

from rangeskyline.kinematics import WaypointPlan
from rangeskyline.netsim import NodeRuntime
from rangeskyline.protocols import Timeline, predict_timeline
from rangeskyline.skyline import DataObject


def oracle_timeline(
    nodes: list[NodeRuntime],
    issuer_id: int,
    range_R: float,
    window: tuple[float, float],
) -> Timeline:
    """True per-segment range-skylines over the window, as id frozensets."""
    t0, t_end = window
    issuer = next(n for n in nodes if n.id == issuer_id)
    sensors = sorted(
        (n for n in nodes if n.attrs is not None and n.id != issuer_id),
        key=lambda n: n.id,
    )
    epochs = {t0, t_end}
    for n in [issuer, *sensors]:
        for t in n.plan.leg_change_times(t0, t_end):
            epochs.add(t)
    marks = sorted(epochs)
    out: Timeline = []
    for a, b in zip(marks, marks[1:]):
        segs = _epoch_segments(issuer, sensors, range_R, a, b)
        for sky, span in segs:
            ids = frozenset(o.id for o in sky)
            if out and out[-1][0] == ids:
                prev, (pa, _) = out[-1]
                out[-1] = (prev, (pa, span[1]))
            else:
                out.append((ids, span))
    if t0 == t_end:
        segs = _epoch_segments(issuer, sensors, range_R, t0, t0)
        out = [(frozenset(o.id for o in segs[0][0]), (t0, t_end))]
    return out or [(frozenset(), (t0, t_end))]


def _epoch_segments(issuer, sensors, range_R, a, b):
    center = issuer.motion_state(a)
    objs = [
        DataObject(n.id, *_anchored(n.plan, a), n.attrs, a)
        for n in sensors
    ]
    return predict_timeline(center, range_R, objs, (a, b), a)


def _anchored(plan: WaypointPlan, t: float):
    state = plan.motion_state_at(t)
    return state.position, state.velocity


def timeline_ids(timeline: Timeline) -> Timeline:
    """Normalize a timeline of object sets into one of id sets."""
    out: Timeline = []
    for sky, span in timeline:
        ids = frozenset(o.id if isinstance(o, DataObject) else o for o in sky)
        if out and out[-1][0] == ids:
            prev, (pa, _) = out[-1]
            out[-1] = (prev, (pa, span[1]))
        else:
            out.append((ids, span))
    return out


def _value_at(timeline: Timeline, t: float) -> frozenset:
    for sky, (a, b) in timeline:
        if a <= t <= b:
            return sky
    if timeline:
        if t < timeline[0][1][0]:
            return timeline[0][0]
        return timeline[-1][0]
    return frozenset()


@dataclass(frozen=True)
class Accuracy:
    precision: float
    recall: float


def precision_recall(
    result: Timeline, oracle: Timeline, window: tuple[float, float]
) -> Accuracy:
    """Time-weighted set precision and recall of a result timeline.

    At each instant: precision is |result ∩ truth| / |result| (1 when both
    empty, 0 when only the result is empty), recall is |result ∩ truth| /
    |truth| (1 when the truth is empty).  Both integrate over the window.
    Degenerate windows compare the two sets at the single instant.
    """
    t0, t_end = window
    res = timeline_ids(result)
    orc = timeline_ids(oracle)
    if t0 == t_end:
        p, r = _instant_scores(_value_at(res, t0), _value_at(orc, t0))
        return Accuracy(p, r)
    cuts = {t0, t_end}
    for tl in (res, orc):
        for _, (a, b) in tl:
            if t0 < a < t_end:
                cuts.add(a)
            if t0 < b < t_end:
                cuts.add(b)
    marks = sorted(cuts)
    p_area = 0.0
    r_area = 0.0
    for a, b in zip(marks, marks[1:]):
        if b <= a:
            continue
        mid = (a + b) / 2.0
        p, r = _instant_scores(_value_at(res, mid), _value_at(orc, mid))
        p_area += p * (b - a)
        r_area += r * (b - a)
    span = t_end - t0
    return Accuracy(p_area / span, r_area / span)


def _instant_scores(got: frozenset, truth: frozenset) -> tuple[float, float]:
    inter = len(got & truth)
    if got:
        precision = inter / len(got)
    else:
        precision = 1.0 if not truth else 0.0
    recall = inter / len(truth) if truth else 1.0
    return precision, recall


def divergence_intervals(
    result: Timeline, oracle: Timeline, window: tuple[float, float]
) -> list[tuple[float, float]]:
    """Maximal sub-intervals of the window where the two timelines disagree."""
    t0, t_end = window
    res = timeline_ids(result)
    orc = timeline_ids(oracle)
    cuts = {t0, t_end}
    for tl in (res, orc):
        for _, (a, b) in tl:
            if t0 < a < t_end:
                cuts.add(a)
            if t0 < b < t_end:
                cuts.add(b)
    marks = sorted(cuts)
    bad: list[tuple[float, float]] = []
    for a, b in zip(marks, marks[1:]):
        if b <= a:
            continue
        mid = (a + b) / 2.0
        if _value_at(res, mid) != _value_at(orc, mid):
            if bad and bad[-1][1] == a:
                bad[-1] = (bad[-1][0], b)
            else:
                bad.append((a, b))
    return bad


def change_points(timeline: Timeline, window: tuple[float, float]) -> list[float]:
    """Window start plus every instant the timeline's set changes."""
    t0, t_end = window
    pts = [t0]
    ids = timeline_ids(timeline)
    for _, (a, _b) in ids[1:]:
        if t0 < a <= t_end:
            pts.append(a)
    return pts
