"""Scenario configuration, experiment runs, sweeps, and CSV metrics.

Two named presets ship with the package: a snapshot workload on a 400 m
square with 100 nodes, and a continuous-monitoring workload on a 500 m
square with 60 nodes, ten-second query windows, and faster movement.  Every
run derives all randomness from one seed string, so the same (scenario,
seed) pair reproduces byte-identical metrics and traces, and different
approaches compared under one seed observe identical placements,
trajectories, attribute draws, and query windows.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, fields, replace

from rangeskyline.analysis import CostParams, derive_ttl
from rangeskyline.kinematics import MotionState, WaypointPlan
from rangeskyline.metrics import oracle_timeline, precision_recall, timeline_ids
from rangeskyline.netsim import (
    LinkModel,
    MSG_QUERY,
    MSG_REPLY,
    MSG_UPDATE,
    NodeRuntime,
    Simulator,
)
from rangeskyline.protocols import (
    MODE_CENTRALIZED,
    MODE_DISTRIBUTED,
    QueryDescriptor,
    QueryProtocol,
)
from rangeskyline.skyline import AttributeVector

APPROACHES = ("centralized", "drsq", "dcrsq")

CSV_HEADER = (
    "scenario,approach,param,value,rep,response_time_s,msgs_total,"
    "msgs_flood,msgs_reply,msgs_update,accessed_objects,precision,recall"
)


@dataclass(frozen=True)
class Scenario:
    """One experiment configuration; field names double as config-file keys."""

    name: str = "custom"
    area_width: float = 400.0
    area_height: float = 400.0
    node_count: int = 100
    query_count: int = 1
    query_range: float = 80.0
    transmission_range: float = 75.0
    speed_min: float = 2.0
    speed_max: float = 2.0
    delta_t: float = 0.0
    report_interval: float = 1.0
    ttl_centralized: int = 5
    ttl_cap: int = 5
    delivery_prob: float = 0.95
    bandwidth_bps: float = 2_000_000.0
    packet_size_bits: float = 1024.0
    per_hop_latency: float = 0.001
    attr_dims: int = 1
    attr_directions: str = ""
    sim_horizon: float = 60.0
    seed: int = 1
    replications: int = 20

    @property
    def area(self) -> float:
        return self.area_width * self.area_height

    @property
    def is_snapshot(self) -> bool:
        return self.delta_t == 0.0

    def directions(self) -> tuple[str, ...]:
        """Per-dimension preference flags; minimize everywhere by default."""
        if not self.attr_directions:
            return tuple("min" for _ in range(self.attr_dims))
        parts = tuple(p.strip() for p in self.attr_directions.split(","))
        if len(parts) != self.attr_dims:
            raise ValueError("attr_directions length must match attr_dims")
        return parts


def scenario1() -> Scenario:
    """Snapshot workload: 100 nodes on 400 m x 400 m, fixed 2 m/s."""
    return Scenario(
        name="scenario1",
        area_width=400.0,
        area_height=400.0,
        node_count=100,
        query_count=1,
        query_range=80.0,
        transmission_range=75.0,
        speed_min=2.0,
        speed_max=2.0,
        delta_t=0.0,
        ttl_centralized=5,
        bandwidth_bps=2_000_000.0,
    )


def scenario2() -> Scenario:
    """Continuous workload: 60 nodes on 500 m x 500 m, speeds up to 10 m/s."""
    return Scenario(
        name="scenario2",
        area_width=500.0,
        area_height=500.0,
        node_count=60,
        query_count=1,
        query_range=100.0,
        transmission_range=75.0,
        speed_min=0.0,
        speed_max=10.0,
        delta_t=10.0,
        ttl_centralized=5,
        bandwidth_bps=2_000_000.0,
        sim_horizon=60.0,
    )


PRESETS = {"scenario1": scenario1, "scenario2": scenario2}


def parse_config(text: str, base: Scenario | None = None) -> Scenario:
    """Flat `key = value` configuration; unknown keys are errors."""
    scen = base or Scenario()
    types = {f.name: f.type for f in fields(Scenario)}
    casts = {"str": str, "int": int, "float": float}
    updates: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in types:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        cast = casts.get(types[key], str)
        updates[key] = cast(value)
    return replace(scen, **updates)


@dataclass
class QueryMetrics:
    query_id: int
    response_time_s: float
    accessed_objects: int
    precision: float
    recall: float
    realized: list
    oracle: list


@dataclass
class RunResult:
    scenario: Scenario
    approach: str
    seed: object
    queries: list[QueryMetrics]
    msgs_flood: int
    msgs_reply: int
    msgs_update: int
    trace: list[str]

    @property
    def msgs_total(self) -> int:
        return self.msgs_flood + self.msgs_reply + self.msgs_update

    @property
    def response_time_s(self) -> float:
        return statistics.fmean(q.response_time_s for q in self.queries)

    @property
    def accessed_objects(self) -> int:
        return sum(q.accessed_objects for q in self.queries)

    @property
    def precision(self) -> float:
        return statistics.fmean(q.precision for q in self.queries)

    @property
    def recall(self) -> float:
        return statistics.fmean(q.recall for q in self.queries)


def build_world(scenario: Scenario, seed: object) -> list[NodeRuntime]:
    """Sensors plus query issuers with seed-determined placement and motion."""
    horizon = world_horizon(scenario, seed)
    place = random.Random(f"{seed}:place")
    nodes: list[NodeRuntime] = []
    total = scenario.node_count + scenario.query_count
    for nid in range(total):
        start = (
            place.uniform(0.0, scenario.area_width),
            place.uniform(0.0, scenario.area_height),
        )
        plan = WaypointPlan(
            start,
            (scenario.area_width, scenario.area_height),
            (scenario.speed_min, scenario.speed_max),
            horizon,
            random.Random(f"{seed}:move:{nid}"),
        )
        if nid < scenario.node_count:
            attr_rng = random.Random(f"{seed}:attr:{nid}")
            attrs = AttributeVector(
                tuple(attr_rng.uniform(0.0, 1.0) for _ in range(scenario.attr_dims)),
                scenario.directions(),
            )
            nodes.append(NodeRuntime(nid, plan, attrs))
        else:
            nodes.append(NodeRuntime(nid, plan, None))
    return nodes


def query_windows(scenario: Scenario, seed: object) -> list[tuple[float, float]]:
    """Issue instants and monitoring windows, identical across approaches."""
    out = []
    for k in range(scenario.query_count):
        rng = random.Random(f"{seed}:qwin:{k}")
        t0 = rng.uniform(1.0, 50.0)
        out.append((t0, t0 + scenario.delta_t))
    return out


def world_horizon(scenario: Scenario, seed: object) -> float:
    windows = query_windows(scenario, seed)
    if not windows:
        return scenario.sim_horizon
    last_end = max(t_end for _, t_end in windows)
    return max(scenario.sim_horizon, last_end + 1.0)


def distributed_ttl(scenario: Scenario) -> int:
    """Flood depth from the spread-cost condition, capped; cap when sparse."""
    params = CostParams(
        scenario.node_count,
        scenario.area,
        scenario.query_range,
        scenario.transmission_range,
        d=scenario.attr_dims + 1,
        hop_probs=(scenario.delivery_prob,),
    )
    try:
        return derive_ttl(params, cap=scenario.ttl_cap)
    except ValueError:
        return scenario.ttl_cap


def run_scenario(scenario: Scenario, seed: object, approach: str) -> RunResult:
    """One deterministic simulation of one approach on one seeded world."""
    if approach not in APPROACHES:
        raise ValueError(f"unknown approach {approach!r}")
    if approach == "drsq" and not scenario.is_snapshot:
        raise ValueError("drsq runs snapshot scenarios; use dcrsq for windows")
    if approach == "dcrsq" and scenario.is_snapshot:
        raise ValueError("dcrsq runs continuous scenarios; use drsq for snapshots")

    nodes = build_world(scenario, seed)
    horizon = world_horizon(scenario, seed)
    link = LinkModel(
        transmission_range=scenario.transmission_range,
        delivery_prob=scenario.delivery_prob,
        bandwidth_bps=scenario.bandwidth_bps,
        packet_size_bits=scenario.packet_size_bits,
        per_hop_latency=scenario.per_hop_latency,
    )
    sim = Simulator(nodes, link, seed=seed, horizon=horizon)
    mode = MODE_CENTRALIZED if approach == "centralized" else MODE_DISTRIBUTED
    proto = QueryProtocol(sim, mode=mode, report_interval=scenario.report_interval)

    ttl = scenario.ttl_centralized if approach == "centralized" else distributed_ttl(scenario)
    windows = query_windows(scenario, seed)
    moving = scenario.speed_max > 0.0
    if not scenario.is_snapshot and moving and mode == MODE_DISTRIBUTED:
        proto.schedule_mobility()
        proto.schedule_contacts()
    for k, window in enumerate(windows):
        issuer = scenario.node_count + k
        desc = QueryDescriptor(
            query_id=k + 1,
            issuer=issuer,
            issuer_state=MotionState((0.0, 0.0), (0.0, 0.0), window[0]),
            range_R=scenario.query_range,
            window=window,
            ttl=ttl,
        )
        proto.issue(desc, window[0])
    sim.run()

    queries: list[QueryMetrics] = []
    for qid in sorted(proto.outcomes):
        outcome = proto.outcomes[qid]
        desc = outcome.descriptor
        truth = oracle_timeline(nodes, desc.issuer, desc.range_R, desc.window)
        realized = timeline_ids(outcome.realized_timeline())
        acc = precision_recall(realized, truth, desc.window)
        response = outcome.response_time
        if response is None:
            response = collection_timeout(scenario, ttl)
        queries.append(
            QueryMetrics(
                query_id=qid,
                response_time_s=response,
                accessed_objects=outcome.accessed_objects,
                precision=acc.precision,
                recall=acc.recall,
                realized=realized,
                oracle=truth,
            )
        )
    return RunResult(
        scenario=scenario,
        approach=approach,
        seed=seed,
        queries=queries,
        msgs_flood=sim.stats.sent.get(MSG_QUERY, 0),
        msgs_reply=sim.stats.sent.get(MSG_REPLY, 0),
        msgs_update=sim.stats.sent.get(MSG_UPDATE, 0),
        trace=sim.trace,
    )


def collection_timeout(scenario: Scenario, ttl: int) -> float:
    link_delay = scenario.packet_size_bits / scenario.bandwidth_bps + scenario.per_hop_latency
    return 4.0 * (ttl + 1) * link_delay


def default_approaches(scenario: Scenario) -> tuple[str, ...]:
    return ("centralized", "drsq") if scenario.is_snapshot else ("centralized", "dcrsq")


def csv_row(result: RunResult, param: str, value: object, rep: int) -> str:
    return (
        f"{result.scenario.name},{result.approach},{param},{value},{rep},"
        f"{result.response_time_s:.9f},{result.msgs_total},{result.msgs_flood},"
        f"{result.msgs_reply},{result.msgs_update},{result.accessed_objects},"
        f"{result.precision:.6f},{result.recall:.6f}"
    )


def sweep(
    scenario: Scenario,
    param: str,
    values: list,
    replications: int | None = None,
    approaches: tuple[str, ...] | None = None,
) -> list[str]:
    """Paired-seed parameter sweep; returns CSV lines including the header."""
    if param != "none" and param not in {f.name for f in fields(Scenario)}:
        raise ValueError(f"unknown sweep parameter {param!r}")
    reps = scenario.replications if replications is None else replications
    lines = [CSV_HEADER]
    for value in values:
        cell = scenario if param == "none" else replace(scenario, **{param: value})
        for rep in range(reps):
            seed = f"{scenario.seed}:{param}:{value}:{rep}"
            for approach in approaches or default_approaches(cell):
                result = run_scenario(cell, seed, approach)
                lines.append(csv_row(result, param, value, rep))
    return lines


@dataclass(frozen=True)
class CellSummary:
    approach: str
    param: str
    value: str
    mean: float
    ci95: float | None
    n: int


def summarize(lines: list[str], metric: str) -> list[CellSummary]:
    """Per-cell mean and 95% confidence interval of one CSV metric column."""
    header = lines[0].split(",")
    idx = header.index(metric)
    cells: dict[tuple[str, str, str], list[float]] = {}
    for line in lines[1:]:
        parts = line.split(",")
        key = (parts[1], parts[2], parts[3])
        cells.setdefault(key, []).append(float(parts[idx]))
    out = []
    for (approach, param, value), xs in sorted(cells.items()):
        mean = statistics.fmean(xs)
        if len(xs) > 1:
            ci = 1.96 * statistics.stdev(xs) / len(xs) ** 0.5
        else:
            ci = None
        out.append(CellSummary(approach, param, value, mean, ci, len(xs)))
    return out
