"""Cooperative range-skyline query processing on mobile nodes.

Three approaches share one driver:

* distributed snapshot: the query floods with a derived TTL; leaf nodes
  report themselves, intermediate nodes merge received objects with their own
  record under dominance checks and forward one batch along the reverse path;
  the issuer merges and prunes the candidates.
* distributed continuous: nodes additionally predict, from carried motion
  states, when each candidate enters and leaves the query range, keep a
  per-segment skyline timeline over the monitoring window, and send updates
  only when their relevant object set changes.
* centralized: the query floods everywhere with a fixed TTL, every receiver
  reports its own record hop by hop with no pruning, re-reporting every
  round for continuous queries; the issuer computes skylines from raw
  reports without motion extrapolation.

Carried object states are anchored at leg starts, so every observer of the
same leg produces an identical record, change detection compares exact
anchors, and re-sensing an unchanged neighbor never triggers an update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from rangeskyline.kinematics import (
    INF,
    MotionState,
    SafeInterval,
    monitoring_interval,
    safe_interval,
)
from rangeskyline.netsim import (
    BROADCAST,
    EVENT_PERIODIC,
    EVENT_QUERY_EXPIRE,
    EVENT_QUERY_ISSUE,
    EVENT_REPLY_DEADLINE,
    EVENT_SAFE_TIME,
    EVENT_WAYPOINT,
    MSG_QUERY,
    MSG_REPLY,
    MSG_UPDATE,
    Message,
    Simulator,
)
from rangeskyline.skyline import (
    DataObject,
    QuerySnapshot,
    merge_prune,
    point_skyline,
)

MODE_DISTRIBUTED = "distributed"
MODE_CENTRALIZED = "centralized"

# Intermediate nodes hold their first reply until the replies of a TTL-deep
# subtree can drain: two hop delays per remaining level plus slack.
HOLD_FACTOR = 2.2
# The issuer gives up on stragglers after this many hop delays per flood level.
TIMEOUT_FACTOR = 4.0
# The issuer recomputes its global timeline at most once per this interval.
RECOMPUTE_INTERVAL = 0.1


@dataclass(frozen=True)
class QueryDescriptor:
    """Everything a sensor needs to serve one query."""

    query_id: int
    issuer: int
    issuer_state: MotionState
    range_R: float
    window: tuple[float, float]
    ttl: int
    generation: int = 0

    def __post_init__(self) -> None:
        if self.window[0] > self.window[1]:
            raise ValueError("window start exceeds window end")
        if self.range_R <= 0:
            raise ValueError("range must be > 0")

    @property
    def is_snapshot(self) -> bool:
        return self.window[0] == self.window[1]


Timeline = list[tuple[frozenset, tuple[float, float]]]


def center_position(center: MotionState, t: float) -> tuple[float, float]:
    dt = t - center.valid_from
    return (center.position[0] + center.velocity[0] * dt,
            center.position[1] + center.velocity[1] * dt)


def _center_offsets(center: MotionState, obj: DataObject, at: float):
    """Relative offset and velocity of obj w.r.t. the moving center at `at`."""
    cx, cy = center_position(center, at)
    ox, oy = obj.position_at(at)
    return (
        (ox - cx, oy - cy),
        (obj.velocity[0] - center.velocity[0], obj.velocity[1] - center.velocity[1]),
    )


def _distance_flip_times(
    center: MotionState, a: DataObject, b: DataObject, lo: float, hi: float
) -> list[float]:
    """Times in (lo, hi) where the two objects tie in distance to the center."""
    (pax, pay), (vax, vay) = _center_offsets(center, a, lo)
    (pbx, pby), (vbx, vby) = _center_offsets(center, b, lo)
    # |pa + va*t|^2 - |pb + vb*t|^2 as c2*t^2 + c1*t + c0, t relative to lo
    c2 = (vax * vax + vay * vay) - (vbx * vbx + vby * vby)
    c1 = 2.0 * ((pax * vax + pay * vay) - (pbx * vbx + pby * vby))
    c0 = (pax * pax + pay * pay) - (pbx * pbx + pby * pby)
    span = hi - lo
    roots: list[float] = []
    if c2 == 0.0:
        if c1 != 0.0:
            roots.append(-c0 / c1)
    else:
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc > 0.0:
            sq = math.sqrt(disc)
            roots.extend(((-c1 - sq) / (2.0 * c2), (-c1 + sq) / (2.0 * c2)))
    return [lo + t for t in roots if 0.0 < t < span]


def _skyline_at(
    center: MotionState,
    range_R: float,
    objects: list[DataObject],
    t: float,
    pre_filtered: bool = False,
    canon: dict[int, tuple[float, ...]] | None = None,
) -> frozenset:
    """Range-skyline of the carried objects with positions advanced to t.

    Same strict Pareto semantics as the generic skyline path, specialized to
    precomputed (distance, canonical attrs) rows; the hot inner loop of every
    segment evaluation.
    """
    cx, cy = center_position(center, t)
    rows: list[tuple[float, tuple[float, ...], DataObject]] = []
    for o in objects:
        ox, oy = o.position_at(t)
        d = math.hypot(ox - cx, oy - cy)
        if pre_filtered or d <= range_R:
            key = canon[o.id] if canon is not None else o.attrs.canonical()
            rows.append((d, key, o))
    keep = []
    for d, key, o in rows:
        dominated = False
        for d2, key2, o2 in rows:
            if o2 is o or d2 > d:
                continue
            if all(x <= y for x, y in zip(key2, key)) and (d2 < d or key2 != key):
                dominated = True
                break
        if not dominated:
            keep.append(o)
    return frozenset(keep)


def predict_timeline(
    center: MotionState,
    range_R: float,
    objects: list[DataObject],
    window: tuple[float, float],
    now: float,
) -> Timeline:
    """Per-segment range-skylines over the window under linear motion.

    Segments break where a candidate's predicted in-range interval starts or
    ends and where two live candidates tie in distance to the center; within
    a segment the skyline is constant, so it is evaluated at the midpoint.
    Returns (frozenset of carried objects, (start, end)) pairs covering
    [max(now, window start), window end], coalescing equal neighbours.
    """
    lo = max(window[0], now)
    hi = window[1]
    if lo > hi:
        return []
    objs = sorted(objects, key=lambda o: o.id)
    canon = {o.id: o.attrs.canonical() for o in objs}
    if lo == hi:
        return [(_skyline_at(center, range_R, objs, lo, canon=canon), (lo, hi))]

    spans: dict[int, SafeInterval] = {}
    cuts: set[float] = {lo, hi}
    for o in objs:
        si = safe_interval(
            center, MotionState(o.position, o.velocity, o.observed_at), range_R, lo
        )
        si = monitoring_interval(si, (lo, hi))
        if si.is_empty:
            continue
        spans[o.id] = si
        cuts.add(si.enter)
        cuts.add(min(si.leave, hi))
    live = [o for o in objs if o.id in spans]
    for i, a in enumerate(live):
        for b in live[i + 1:]:
            overlap = spans[a.id].intersect(spans[b.id])
            if overlap.is_empty:
                continue
            for t in _distance_flip_times(center, a, b, lo, hi):
                if overlap.enter < t < min(overlap.leave, hi):
                    cuts.add(t)

    marks = sorted(cuts)
    out: Timeline = []
    for a, b in zip(marks, marks[1:]):
        if b <= a:
            continue
        mid = (a + b) / 2.0
        members = [o for o in live if spans[o.id].contains(mid)]
        sky = _skyline_at(center, range_R, members, mid, pre_filtered=True, canon=canon)
        if out and out[-1][0] == sky:
            prev_set, (pa, _) = out[-1]
            out[-1] = (prev_set, (pa, b))
        else:
            out.append((sky, (a, b)))
    return out or [(frozenset(), (lo, hi))]


def relevant_union(timeline: Timeline) -> frozenset:
    """Every object appearing in at least one segment's skyline."""
    out: set = set()
    for sky, _ in timeline:
        out |= sky
    return frozenset(out)


def signature(objects) -> frozenset:
    """Change-detection key: object identity plus its motion anchor."""
    return frozenset((o.id, o.observed_at) for o in objects)


@dataclass
class SensorQueryState:
    """What one sensor tracks for one buffered query."""

    descriptor: QueryDescriptor
    known: dict[int, DataObject] = field(default_factory=dict)
    self_record: DataObject | None = None
    replied: bool = False
    last_sent: frozenset = frozenset()

    def absorb(self, obj: DataObject) -> None:
        kept = self.known.get(obj.id)
        if kept is None or obj.observed_at > kept.observed_at:
            self.known[obj.id] = obj


@dataclass
class QueryOutcome:
    """Issuer-side record of one query's lifetime, consumed by the harness."""

    descriptor: QueryDescriptor
    issue_time: float
    response_time: float | None = None
    accessed_objects: int = 0
    known: dict[int, DataObject] = field(default_factory=dict)
    final_snapshot: frozenset | None = None
    history: list[tuple[float, Timeline]] = field(default_factory=list)
    last_recompute: float = -INF
    recompute_scheduled: bool = False
    # true when the collection ended with nothing received at all
    low_confidence: bool = False

    def absorb(self, obj: DataObject) -> None:
        kept = self.known.get(obj.id)
        if kept is None or obj.observed_at > kept.observed_at:
            self.known[obj.id] = obj

    def realized_timeline(self) -> Timeline:
        """What the issuer believed at each instant of the window."""
        t0, t_end = self.descriptor.window
        if t0 == t_end:
            return [(self.final_snapshot or frozenset(), (t0, t_end))]
        out: Timeline = []

        def push(sky: frozenset, a: float, b: float) -> None:
            if b <= a:
                return
            if out and out[-1][0] == sky and out[-1][1][1] == a:
                prev, (pa, _) = out[-1]
                out[-1] = (prev, (pa, b))
            else:
                out.append((sky, (a, b)))

        edits = [(t, tl) for t, tl in self.history if t <= t_end]
        cursor = t0
        for i, (t_known, tl) in enumerate(edits):
            upper = edits[i + 1][0] if i + 1 < len(edits) else t_end
            lower = max(t_known, t0)
            if lower > cursor:
                push(frozenset(), cursor, lower)
                cursor = lower
            for sky, (a, b) in tl:
                a2, b2 = max(a, lower), min(b, upper)
                push(sky, a2, b2)
                cursor = max(cursor, b2)
        if cursor < t_end:
            push(out[-1][0] if out else frozenset(), cursor, t_end)
        return out or [(frozenset(), (t0, t_end))]


class QueryProtocol:
    """Event handlers wiring one processing approach into a simulator."""

    def __init__(
        self,
        sim: Simulator,
        mode: str = MODE_DISTRIBUTED,
        hold_factor: float = HOLD_FACTOR,
        timeout_factor: float = TIMEOUT_FACTOR,
        recompute_interval: float = RECOMPUTE_INTERVAL,
        report_interval: float = 1.0,
    ) -> None:
        if mode not in (MODE_DISTRIBUTED, MODE_CENTRALIZED):
            raise ValueError(f"unknown mode {mode!r}")
        self.sim = sim
        self.mode = mode
        self.hold_factor = hold_factor
        self.timeout_factor = timeout_factor
        self.recompute_interval = recompute_interval
        self.report_interval = report_interval
        self.outcomes: dict[int, QueryOutcome] = {}
        self._contacts_enabled = False
        sim.on_message = self._on_message
        sim.on_collection_complete = self._on_collection_complete
        sim.register(EVENT_QUERY_ISSUE, self._on_issue)
        sim.register(EVENT_REPLY_DEADLINE, self._on_deadline)
        sim.register(EVENT_WAYPOINT, self._on_waypoint)
        sim.register(EVENT_SAFE_TIME, self._on_trigger)
        sim.register(EVENT_PERIODIC, self._on_periodic_round)
        sim.register(EVENT_QUERY_EXPIRE, self._on_expire)

    # -- setup ---------------------------------------------------------------

    def issue(self, descriptor: QueryDescriptor, at: float) -> None:
        self.sim.schedule(
            at,
            EVENT_QUERY_ISSUE,
            {"query_id": descriptor.query_id, "node": descriptor.issuer, "descriptor": descriptor},
        )

    def schedule_mobility(self) -> None:
        """Waypoint-arrival events for every node's leg changes."""
        for nid in sorted(self.sim.nodes):
            for t in self.sim.nodes[nid].plan.leg_change_times(0.0, self.sim.horizon):
                self.sim.schedule(t, EVENT_WAYPOINT, {"node": nid})

    def schedule_contacts(self) -> None:
        """Range-crossing triggers for all node pairs on their current legs."""
        self._contacts_enabled = True
        ids = sorted(self.sim.nodes)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                self._schedule_pair_contact(a, b, 0.0)

    def _schedule_pair_contact(self, a: int, b: int, t: float) -> None:
        na, nb = self.sim.nodes[a], self.sim.nodes[b]
        la, lb = na.plan.leg_at(t), nb.plan.leg_at(t)
        valid_until = min(la.t_end, lb.t_end, self.sim.horizon)
        if valid_until <= t:
            return
        si = safe_interval(
            na.motion_state(t), nb.motion_state(t), self.sim.link.transmission_range, t
        )
        if si.is_empty or si.enter <= t or si.enter > valid_until:
            return
        self.sim.schedule(
            si.enter,
            EVENT_SAFE_TIME,
            {"a": a, "b": b, "leg_a": na.leg_seq(t), "leg_b": nb.leg_seq(t)},
        )

    # -- sensing ---------------------------------------------------------------

    def _sense(self, node_id: int, t: float, predictive: bool) -> DataObject:
        """Own or neighbor record; predictive records anchor at the leg start."""
        node = self.sim.nodes[node_id]
        leg = node.plan.leg_at(t)
        if predictive:
            if t >= leg.t_end:
                return DataObject(
                    node_id, leg.position_at(leg.t_end), (0.0, 0.0), node.attrs, leg.t_end
                )
            return DataObject(node_id, leg.origin, leg.velocity, node.attrs, leg.t_start)
        state = node.motion_state(t)
        return DataObject(node_id, state.position, state.velocity, node.attrs, t)

    def _sense_neighborhood(self, node_id: int, state: SensorQueryState, t: float) -> None:
        node = self.sim.nodes[node_id]
        if node.attrs is not None:
            state.absorb(self._sense(node_id, t, predictive=True))
        for nid in sorted(self.sim.neighbors_of(node_id, t)):
            if self.sim.nodes[nid].attrs is not None:
                state.absorb(self._sense(nid, t, predictive=True))

    # -- query issue and dissemination -------------------------------------------

    def _on_issue(self, payload: dict, t: float) -> None:
        desc: QueryDescriptor = payload["descriptor"]
        qid = desc.query_id
        desc = replace(desc, issuer_state=self.sim.nodes[desc.issuer].motion_state(t))
        self.outcomes[qid] = QueryOutcome(descriptor=desc, issue_time=t)
        self.sim.nodes[desc.issuer].store_query(qid, desc)
        self.sim.flood(
            desc.issuer,
            Message(MSG_QUERY, desc.issuer, BROADCAST, desc.ttl, qid, payload=desc, initial=True),
        )
        timeout = t + self.timeout_factor * (desc.ttl + 1) * self.sim.link.hop_delay
        self.sim.schedule(timeout, EVENT_QUERY_EXPIRE, {"query_id": qid, "reason": "timeout"})
        if not desc.is_snapshot:
            if self.mode == MODE_CENTRALIZED:
                self.sim.schedule(
                    t + self.report_interval, EVENT_PERIODIC, {"query_id": qid, "round": 1}
                )
            self.sim.schedule(
                desc.window[1], EVENT_QUERY_EXPIRE, {"query_id": qid, "reason": "window-end"}
            )

    def _reflood(self, qid: int, t: float) -> None:
        outcome = self.outcomes[qid]
        desc = replace(
            outcome.descriptor,
            issuer_state=self.sim.nodes[outcome.descriptor.issuer].motion_state(t),
            generation=outcome.descriptor.generation + 1,
        )
        outcome.descriptor = desc
        self.sim.nodes[desc.issuer].store_query(qid, desc)
        self.sim.flood(
            desc.issuer,
            Message(MSG_QUERY, desc.issuer, BROADCAST, desc.ttl, qid, payload=desc,
                    generation=desc.generation),
        )

    # -- message dispatch ----------------------------------------------------------

    def _on_message(self, node_id: int, msg: Message, t: float) -> None:
        if msg.msg_type == MSG_QUERY:
            self._on_query_received(node_id, msg, t)
            return
        outcome = self.outcomes.get(msg.query_id)
        if outcome is not None and node_id == outcome.descriptor.issuer:
            self._issuer_receive(outcome, msg, t)
        else:
            self._sensor_receive(node_id, msg, t)

    def _on_query_received(self, node_id: int, msg: Message, t: float) -> None:
        desc: QueryDescriptor = msg.payload
        qid = desc.query_id
        if self._expired(desc, t):
            return
        outcome = self.outcomes.get(qid)
        if outcome is not None and node_id == outcome.descriptor.issuer:
            return
        node = self.sim.nodes[node_id]
        fresh = qid not in node.query_buffer
        if not node.store_query(qid, desc):
            return
        state = node.state.get(qid)
        if state is None:
            state = SensorQueryState(descriptor=desc)
            node.state[qid] = state
        else:
            state.descriptor = desc
        if not fresh:
            # re-announcement: the center trajectory changed
            if self.mode == MODE_DISTRIBUTED and not desc.is_snapshot:
                self._monitor_tick(node_id, state, t)
            return
        if self.mode == MODE_CENTRALIZED:
            if node.attrs is not None:
                record = self._sense(node_id, t, predictive=False)
                self._send_up(node_id, qid, [record], MSG_REPLY, initial=msg.initial)
            state.replied = True
            return
        if desc.is_snapshot:
            if node.attrs is not None:
                state.self_record = self._sense(node_id, t, predictive=False)
                state.absorb(state.self_record)
        else:
            self._sense_neighborhood(node_id, state, t)
        if msg.ttl > 0:
            deadline = t + self.hold_factor * msg.ttl * self.sim.link.hop_delay
            self.sim.schedule_initial(
                deadline, EVENT_REPLY_DEADLINE, qid, {"node": node_id, "query_id": qid}
            )
        else:
            self._first_reply(node_id, state, t, initial=msg.initial)

    def _on_deadline(self, payload: dict, t: float) -> None:
        node_id, qid = payload["node"], payload["query_id"]
        state = self.sim.nodes[node_id].state.get(qid)
        if state is None or state.replied:
            return
        self._first_reply(node_id, state, t, initial=True)

    def _first_reply(self, node_id: int, state: SensorQueryState, t: float, initial: bool) -> None:
        state.replied = True
        batch = self._compose_batch(state, t)
        state.last_sent = signature(batch)
        if batch:
            self._send_up(node_id, state.descriptor.query_id, batch, MSG_REPLY, initial=initial)

    def _sensor_receive(self, node_id: int, msg: Message, t: float) -> None:
        state = self.sim.nodes[node_id].state.get(msg.query_id)
        if state is None:
            # plain relay on the reverse path, no local processing
            self.sim.reverse_forward(node_id, replace(msg, source=node_id))
            return
        if self._expired(state.descriptor, t):
            return
        if self.mode == MODE_CENTRALIZED:
            # no pruning: relay every report toward the issuer
            self.sim.reverse_forward(node_id, replace(msg, source=node_id))
            return
        state.absorb(msg.payload)
        if not state.replied:
            return
        self._recompute_and_send(
            node_id, state, t,
            msg_type=MSG_REPLY if msg.initial else MSG_UPDATE,
            initial=msg.initial,
        )

    def _issuer_receive(self, outcome: QueryOutcome, msg: Message, t: float) -> None:
        outcome.accessed_objects += 1
        outcome.absorb(msg.payload)
        if not outcome.descriptor.is_snapshot:
            self._schedule_issuer_recompute(outcome, t)

    # -- sensor-side computation ------------------------------------------------

    def _compose_batch(self, state: SensorQueryState, t: float) -> list[DataObject]:
        desc = state.descriptor
        if desc.is_snapshot:
            pool = set(state.known.values())
            q = QuerySnapshot(center_position(desc.issuer_state, desc.window[0]), desc.range_R)
            return sorted(point_skyline(q, pool), key=lambda o: o.id)
        timeline = predict_timeline(
            desc.issuer_state, desc.range_R, list(state.known.values()), desc.window, t
        )
        return sorted(relevant_union(timeline), key=lambda o: o.id)

    def _recompute_and_send(
        self, node_id: int, state: SensorQueryState, t: float, msg_type: str, initial: bool
    ) -> None:
        batch = self._compose_batch(state, t)
        sig = signature(batch)
        if sig == state.last_sent:
            return
        state.last_sent = sig
        if batch:
            self._send_up(node_id, state.descriptor.query_id, batch, msg_type, initial=initial)

    def _monitor_tick(self, node_id: int, state: SensorQueryState, t: float) -> None:
        """Refresh neighborhood knowledge and report prediction changes."""
        if state.descriptor.is_snapshot or self._expired(state.descriptor, t):
            return
        self._sense_neighborhood(node_id, state, t)
        if state.replied:
            self._recompute_and_send(node_id, state, t, MSG_UPDATE, initial=False)

    # -- transport ----------------------------------------------------------------

    def _send_up(
        self, node_id: int, qid: int, objects: list[DataObject], msg_type: str, initial: bool
    ) -> None:
        for obj in objects:
            self.sim.reverse_forward(
                node_id,
                Message(msg_type, node_id, BROADCAST, 0, qid, payload=obj, initial=initial),
            )

    # -- issuer-side computation -----------------------------------------------------

    def _schedule_issuer_recompute(self, outcome: QueryOutcome, t: float) -> None:
        if outcome.recompute_scheduled:
            return
        due = outcome.last_recompute + self.recompute_interval
        if due <= t:
            self._issuer_recompute(outcome, t)
        else:
            outcome.recompute_scheduled = True
            self.sim.schedule(
                due, EVENT_SAFE_TIME, {"recompute": outcome.descriptor.query_id}
            )

    def _issuer_recompute(self, outcome: QueryOutcome, t: float) -> None:
        outcome.last_recompute = t
        outcome.recompute_scheduled = False
        desc = outcome.descriptor
        t0, t_end = desc.window
        if t > t_end:
            return
        center = self.sim.nodes[desc.issuer].motion_state(t)
        if self.mode == MODE_CENTRALIZED:
            # raw reported positions, no extrapolation
            q = QuerySnapshot(center.position, desc.range_R)
            sky = frozenset(merge_prune(q, [set(outcome.known.values())]))
            outcome.history.append((t, [(sky, (max(t, t0), t_end))]))
            return
        timeline = predict_timeline(
            center, desc.range_R, list(outcome.known.values()), desc.window, t
        )
        outcome.history.append((t, timeline))

    def _finalize_snapshot(self, outcome: QueryOutcome, t: float) -> None:
        if outcome.final_snapshot is not None:
            return
        desc = outcome.descriptor
        outcome.response_time = t - outcome.issue_time
        outcome.low_confidence = not outcome.known
        q = QuerySnapshot(center_position(desc.issuer_state, desc.window[0]), desc.range_R)
        outcome.final_snapshot = frozenset(merge_prune(q, [set(outcome.known.values())]))

    def _on_collection_complete(self, qid: int, t: float) -> None:
        outcome = self.outcomes.get(qid)
        if outcome is None:
            return
        if outcome.descriptor.is_snapshot:
            self._finalize_snapshot(outcome, t)
            return
        if outcome.response_time is None:
            outcome.response_time = t - outcome.issue_time
        self._issuer_recompute(outcome, t)

    # -- mobility, contacts, rounds ------------------------------------------------

    def _on_waypoint(self, payload: dict, t: float) -> None:
        moved = payload["node"]
        for qid in sorted(self.outcomes):
            outcome = self.outcomes[qid]
            desc = outcome.descriptor
            if desc.is_snapshot or self._expired(desc, t) or t < outcome.issue_time:
                continue
            if desc.issuer == moved and self.mode == MODE_DISTRIBUTED:
                self._reflood(qid, t)
                self._schedule_issuer_recompute(outcome, t)
        if self.mode == MODE_DISTRIBUTED:
            self._touch_holders_near(moved, t)
        if self._contacts_enabled:
            for other in sorted(self.sim.nodes):
                if other != moved:
                    self._schedule_pair_contact(min(moved, other), max(moved, other), t)

    def _touch_holders_near(self, moved: int, t: float) -> None:
        for nid in sorted(self.sim.neighbors_of(moved, t)) + [moved]:
            node = self.sim.nodes[nid]
            for qid in sorted(node.state):
                outcome = self.outcomes.get(qid)
                if outcome is not None and nid == outcome.descriptor.issuer:
                    continue
                self._monitor_tick(nid, node.state[qid], t)

    def _on_trigger(self, payload: dict, t: float) -> None:
        if "recompute" in payload:
            outcome = self.outcomes.get(payload["recompute"])
            if outcome is not None:
                outcome.recompute_scheduled = False
                self._issuer_recompute(outcome, t)
            return
        a, b = payload["a"], payload["b"]
        na, nb = self.sim.nodes[a], self.sim.nodes[b]
        if na.leg_seq(t) != payload["leg_a"] or nb.leg_seq(t) != payload["leg_b"]:
            return
        if self.mode != MODE_DISTRIBUTED:
            return
        self._piggyback(a, b, t)
        self._piggyback(b, a, t)
        for nid in (min(a, b), max(a, b)):
            node = self.sim.nodes[nid]
            for qid in sorted(node.state):
                outcome = self.outcomes.get(qid)
                if outcome is not None and nid == outcome.descriptor.issuer:
                    continue
                self._monitor_tick(nid, node.state[qid], t)

    def _piggyback(self, holder: int, learner: int, t: float) -> None:
        """A node entering a holder's range learns its active queries free."""
        giver = self.sim.nodes[holder]
        taker = self.sim.nodes[learner]
        for qid in sorted(giver.query_buffer):
            desc = giver.query_buffer[qid]
            if not isinstance(desc, QueryDescriptor) or desc.is_snapshot:
                continue
            if self._expired(desc, t) or qid in taker.query_buffer or learner == desc.issuer:
                continue
            if not taker.store_query(qid, desc):
                continue
            if (learner, qid) not in self.sim.reverse_parent:
                self.sim.reverse_parent[(learner, qid)] = holder
            state = SensorQueryState(descriptor=desc, replied=True)
            taker.state[qid] = state
            self._monitor_tick(learner, state, t)

    def _on_periodic_round(self, payload: dict, t: float) -> None:
        qid = payload["query_id"]
        outcome = self.outcomes.get(qid)
        if outcome is None or t >= outcome.descriptor.window[1]:
            return
        self._reflood(qid, t)
        for nid in sorted(self.sim.nodes):
            node = self.sim.nodes[nid]
            if (
                qid in node.query_buffer
                and nid != outcome.descriptor.issuer
                and node.attrs is not None
            ):
                record = self._sense(nid, t, predictive=False)
                self._send_up(nid, qid, [record], MSG_UPDATE, initial=False)
        nxt = t + self.report_interval
        if nxt < outcome.descriptor.window[1]:
            self.sim.schedule(nxt, EVENT_PERIODIC, {"query_id": qid, "round": payload["round"] + 1})

    def _on_expire(self, payload: dict, t: float) -> None:
        qid = payload["query_id"]
        outcome = self.outcomes.get(qid)
        if outcome is None:
            return
        if payload.get("reason") == "timeout":
            if outcome.descriptor.is_snapshot:
                self._finalize_snapshot(outcome, t)
            elif outcome.response_time is None:
                outcome.response_time = t - outcome.issue_time
                self._issuer_recompute(outcome, t)
            return
        for nid in sorted(self.sim.nodes):
            node = self.sim.nodes[nid]
            node.query_buffer.pop(qid, None)
            node.state.pop(qid, None)

    @staticmethod
    def _expired(desc: QueryDescriptor, t: float) -> bool:
        return not desc.is_snapshot and t > desc.window[1]
