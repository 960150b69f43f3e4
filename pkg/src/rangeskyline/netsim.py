"""Deterministic discrete-event simulation of a multi-hop wireless network.

One event heap drives the run; events are totally ordered by (time, sequence
number), so a (scenario, seed) pair always replays the identical trace.  The
radio layer is a closed disk: nodes hear each other iff their distance is at
most the transmission range at the send instant.  Every transmitted packet is
one message; a broadcast counts one message per in-range receiver.  Each
attempt independently succeeds with the configured per-hop probability, and
delivery lands after the packet's serialization time plus a fixed per-hop
latency.  Senders own a FIFO transmit queue, so bursts serialize.

Query dissemination is TTL-limited flooding with reverse-path recording:
the first copy of a query a node hears fixes its upstream parent, duplicates
are dropped, and a positive TTL is decremented and re-broadcast.  Replies
travel hop by hop along recorded parents.
"""

from __future__ import annotations

import heapq
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Callable

from rangeskyline.kinematics import MotionState, WaypointPlan
from rangeskyline.skyline import AttributeVector

MSG_QUERY = "RSQ"
MSG_REPLY = "RSQ_REPLY"
MSG_UPDATE = "UPDATE"

BROADCAST = -1

EVENT_MESSAGE = "message-delivery"
EVENT_MESSAGE_LOST = "message-lost"
EVENT_WAYPOINT = "waypoint-arrival"
EVENT_PERIODIC = "periodic-report"
EVENT_SAFE_TIME = "safe-time-trigger"
EVENT_QUERY_ISSUE = "query-issue"
EVENT_QUERY_EXPIRE = "query-expire"
EVENT_REPLY_DEADLINE = "reply-deadline"


@dataclass(frozen=True)
class LinkModel:
    """Radio parameters shared by every node."""

    transmission_range: float
    delivery_prob: float = 1.0
    bandwidth_bps: float = 2_000_000.0
    packet_size_bits: float = 1024.0
    per_hop_latency: float = 0.001

    def __post_init__(self) -> None:
        if self.transmission_range <= 0:
            raise ValueError("transmission range must be > 0")
        if not 0.0 < self.delivery_prob <= 1.0:
            raise ValueError("delivery probability must lie in (0, 1]")

    @property
    def tx_time(self) -> float:
        return self.packet_size_bits / self.bandwidth_bps

    @property
    def hop_delay(self) -> float:
        return self.tx_time + self.per_hop_latency


@dataclass(frozen=True)
class Message:
    """One network packet carrying exactly one object or one query descriptor."""

    msg_type: str
    source: int
    dest: int
    ttl: int
    query_id: int
    payload: object = None
    generation: int = 0
    initial: bool = False
    path: tuple[int, ...] = ()

    @property
    def object_id(self) -> object:
        pid = getattr(self.payload, "id", None)
        return pid if pid is not None else "-"


class NodeRuntime:
    """Per-node simulation state: motion plan, sensed data, query buffer."""

    def __init__(
        self,
        node_id: int,
        plan: WaypointPlan,
        attrs: AttributeVector | None = None,
        buffer_limit: int = 32,
    ) -> None:
        self.id = node_id
        self.plan = plan
        self.attrs = attrs
        self.buffer_limit = buffer_limit
        self.query_buffer: dict[int, object] = {}
        self.tx_busy_until = 0.0
        self.state: dict = {}

    def motion_state(self, t: float) -> MotionState:
        return self.plan.motion_state_at(t)

    def position(self, t: float) -> tuple[float, float]:
        return self.plan.position_at(t)

    def leg_seq(self, t: float) -> int:
        return self.plan.leg_index_at(t)

    def store_query(self, query_id: int, descriptor: object) -> bool:
        """Buffer a query descriptor; refuses new queries past the limit."""
        if query_id in self.query_buffer:
            self.query_buffer[query_id] = descriptor
            return True
        if len(self.query_buffer) >= self.buffer_limit:
            return False
        self.query_buffer[query_id] = descriptor
        return True


@dataclass
class MessageStats:
    """Per-run message accounting, split by message type."""

    sent: dict[str, int] = field(default_factory=lambda: defaultdict(int))
    delivered: dict[str, int] = field(default_factory=lambda: defaultdict(int))
    lost: dict[str, int] = field(default_factory=lambda: defaultdict(int))

    def total(self, table: dict[str, int]) -> int:
        return sum(table.values())

    @property
    def sent_total(self) -> int:
        return self.total(self.sent)

    @property
    def delivered_total(self) -> int:
        return self.total(self.delivered)

    @property
    def lost_total(self) -> int:
        return self.total(self.lost)


class Simulator:
    """Single-threaded deterministic event loop over a set of mobile nodes.

    Protocol logic attaches through handler callbacks registered per event
    kind; the engine owns transmission, loss, flood forwarding, reverse-path
    bookkeeping, tracing, and per-query completion detection.
    """

    def __init__(
        self,
        nodes: list[NodeRuntime],
        link: LinkModel,
        seed: int = 0,
        horizon: float = 60.0,
        keep_trace: bool = True,
    ) -> None:
        self.nodes: dict[int, NodeRuntime] = {n.id: n for n in nodes}
        if len(self.nodes) != len(nodes):
            raise ValueError("duplicate node ids")
        self.link = link
        self.horizon = horizon
        self.clock = 0.0
        self.stats = MessageStats()
        self.trace: list[str] = []
        self.keep_trace = keep_trace
        self._heap: list = []
        self._seq = itertools.count()
        self._handlers: dict[str, Callable] = {}
        self._loss_rng: dict[int, random.Random] = {
            nid: random.Random(f"{seed}:loss:{nid}") for nid in sorted(self.nodes)
        }
        self.reverse_parent: dict[tuple[int, int], int] = {}
        self._seen_floods: dict[int, set[tuple[int, int]]] = defaultdict(set)
        self._pending_initial: dict[int, int] = defaultdict(int)
        self._collection_done: set[int] = set()
        self.on_collection_complete: Callable[[int, float], None] | None = None
        self.on_message: Callable[[int, Message, float], None] | None = None

    # -- event machinery ----------------------------------------------------

    def register(self, kind: str, handler: Callable) -> None:
        self._handlers[kind] = handler

    def schedule(self, fire_at: float, kind: str, payload: object = None) -> None:
        if fire_at < self.clock:
            raise ValueError("cannot schedule into the past")
        heapq.heappush(self._heap, (fire_at, next(self._seq), kind, payload))

    def schedule_initial(self, fire_at: float, kind: str, query_id: int, payload: object) -> None:
        """Schedule work that belongs to a query's first collection wave."""
        self._pending_initial[query_id] += 1
        self.schedule(fire_at, kind, payload)

    def run(self, until: float | None = None) -> None:
        """Process events in (time, sequence) order up to the stop time.

        The clock stays at the last processed event, so callers can inject
        more work and resume.
        """
        stop = self.horizon if until is None else until
        while self._heap and self._heap[0][0] <= stop:
            fire_at, _, kind, payload = heapq.heappop(self._heap)
            self.clock = fire_at
            if kind == EVENT_MESSAGE:
                self._deliver(payload)
            else:
                self._trace_event(kind, payload)
                handler = self._handlers.get(kind)
                if handler is not None:
                    handler(payload, fire_at)
                if kind == EVENT_REPLY_DEADLINE and payload is not None:
                    self._settle_initial(payload.get("query_id"))

    # -- geometry oracle ----------------------------------------------------

    def neighbors_of(self, node_id: int, t: float) -> dict[int, MotionState]:
        """All nodes within the transmission range (closed ball) at time t."""
        me = self.nodes[node_id]
        mx, my = me.position(t)
        r2 = self.link.transmission_range**2
        table: dict[int, MotionState] = {}
        for nid in sorted(self.nodes):
            if nid == node_id:
                continue
            other = self.nodes[nid]
            ox, oy = other.position(t)
            if (ox - mx) ** 2 + (oy - my) ** 2 <= r2:
                table[nid] = other.motion_state(t)
        return table

    def in_contact(self, a: int, b: int, t: float) -> bool:
        ax, ay = self.nodes[a].position(t)
        bx, by = self.nodes[b].position(t)
        return (ax - bx) ** 2 + (ay - by) ** 2 <= self.link.transmission_range**2

    # -- transmission -------------------------------------------------------

    def _transmit(self, sender: int, receiver: int, msg: Message, depart: float, arrive: float) -> bool:
        self.stats.sent[msg.msg_type] += 1
        ok = self._loss_rng[sender].random() < self.link.delivery_prob
        if not ok:
            self.stats.lost[msg.msg_type] += 1
            self._trace_msg(EVENT_MESSAGE_LOST, msg, receiver)
            return False
        delivered = replace(msg, dest=receiver, path=msg.path + (sender,))
        if msg.initial:
            self._pending_initial[msg.query_id] += 1
        self.schedule(arrive, EVENT_MESSAGE, delivered)
        return True

    def _next_slot(self, sender: int) -> tuple[float, float]:
        node = self.nodes[sender]
        start = max(self.clock, node.tx_busy_until)
        node.tx_busy_until = start + self.link.tx_time
        return start, node.tx_busy_until + self.link.per_hop_latency

    def broadcast(self, sender: int, msg: Message) -> int:
        """Send one packet to every current neighbor; returns receiver count."""
        receivers = sorted(self.neighbors_of(sender, self.clock))
        if not receivers:
            return 0
        depart, arrive = self._next_slot(sender)
        for rid in receivers:
            self._transmit(sender, rid, msg, depart, arrive)
        return len(receivers)

    def unicast(self, sender: int, receiver: int, msg: Message) -> bool:
        """Send one packet to a specific node; drops if it moved out of range."""
        if receiver not in self.nodes or not self.in_contact(sender, receiver, self.clock):
            self.stats.sent[msg.msg_type] += 1
            self.stats.lost[msg.msg_type] += 1
            self._trace_msg(EVENT_MESSAGE_LOST, msg, receiver)
            return False
        depart, arrive = self._next_slot(sender)
        return self._transmit(sender, receiver, msg, depart, arrive)

    # -- flooding and reverse paths ------------------------------------------

    def flood(self, origin: int, msg: Message) -> None:
        """Start a TTL-limited flood of a query message from its origin."""
        self._seen_floods[origin].add((msg.query_id, msg.generation))
        self.broadcast(origin, replace(msg, source=origin))

    def reverse_forward(self, sender: int, msg: Message) -> bool:
        """Unicast toward the query origin along the recorded reverse path."""
        parent = self.reverse_parent.get((sender, msg.query_id))
        if parent is None:
            self.stats.sent[msg.msg_type] += 1
            self.stats.lost[msg.msg_type] += 1
            self._trace_msg(EVENT_MESSAGE_LOST, msg, BROADCAST)
            return False
        return self.unicast(sender, parent, replace(msg, source=sender))

    def _deliver(self, msg: Message) -> None:
        self.stats.delivered[msg.msg_type] += 1
        self._trace_msg(EVENT_MESSAGE, msg, msg.dest)
        node = self.nodes[msg.dest]
        if msg.msg_type == MSG_QUERY:
            key = (msg.query_id, msg.generation)
            seen = self._seen_floods[msg.dest]
            if key not in seen:
                seen.add(key)
                if (msg.dest, msg.query_id) not in self.reverse_parent:
                    self.reverse_parent[(msg.dest, msg.query_id)] = msg.source
                if msg.ttl > 0:
                    self.broadcast(
                        msg.dest,
                        replace(msg, source=msg.dest, ttl=msg.ttl - 1, dest=BROADCAST),
                    )
                if self.on_message is not None:
                    self.on_message(msg.dest, msg, self.clock)
        else:
            if self.on_message is not None:
                self.on_message(msg.dest, msg, self.clock)
        if msg.initial:
            self._settle_initial(msg.query_id)

    # -- per-query completion ------------------------------------------------

    def _settle_initial(self, query_id: int | None) -> None:
        if query_id is None:
            return
        self._pending_initial[query_id] -= 1
        if (
            self._pending_initial[query_id] == 0
            and query_id not in self._collection_done
        ):
            self._collection_done.add(query_id)
            if self.on_collection_complete is not None:
                self.on_collection_complete(query_id, self.clock)

    def collection_finished(self, query_id: int) -> bool:
        return query_id in self._collection_done

    # -- tracing ---------------------------------------------------------------

    def _trace_msg(self, kind: str, msg: Message, dest: int) -> None:
        if self.keep_trace:
            self.trace.append(
                f"{self.clock:.9f}\t{kind}\t{msg.source}\t{dest}\t{msg.msg_type}"
                f"\t{msg.ttl}\t{msg.query_id}\t{msg.object_id}"
            )

    def _trace_event(self, kind: str, payload: object) -> None:
        if not self.keep_trace:
            return
        node = "-"
        qid = "-"
        if isinstance(payload, dict):
            node = payload.get("node", "-")
            qid = payload.get("query_id", "-")
        self.trace.append(f"{self.clock:.9f}\t{kind}\t{node}\t-\t-\t-\t{qid}\t-")
