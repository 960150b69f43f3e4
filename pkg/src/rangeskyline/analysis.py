"""Closed-form network-cost model for range-skyline query processing.

Models query spreading and reply collection as a hop-indexed branching
process: the expected number of i-hop neighbors is the one-hop density raised
to the i-th power, discounted by per-hop delivery probabilities.  The reply
term for the cooperative approach scales each hop by the expected local
skyline size instead of the raw population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPREAD_MODES = ("snapshot-centralized", "snapshot-drsq", "continuous-centralized", "continuous-dcrsq")

# Eq-as-printed indexing for the cooperative reply cost uses P[k-i]; the
# cumulative variant multiplies the full per-hop product like the
# centralized formula does.
REPLY_PROB_AS_PRINTED = "as-printed"
REPLY_PROB_CUMULATIVE = "cumulative"


def density(n_nodes: int, area: float, radius: float) -> int:
    """Expected node count inside a disk of the given radius, floored."""
    if n_nodes <= 0 or area <= 0 or radius < 0:
        raise ValueError("density needs positive node count and area, radius >= 0")
    return math.floor(math.pi * radius * radius * n_nodes / area)


def expected_skyline_size(n_nodes: float, d: int) -> float:
    """Point estimate (ln N)^(d-1) of the skyline size over uniform data."""
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    if d < 1:
        raise ValueError("dimensionality must be >= 1")
    return math.log(n_nodes) ** (d - 1)


@dataclass(frozen=True)
class CostParams:
    """Inputs to the cost formulas.

    hop_probs holds the per-hop delivery probabilities P_1..P_k; it is
    extended by repeating its last value when a formula needs more hops.
    Densities derive from node count, area and the two radii.
    """

    n_nodes: int
    area: float
    query_range: float
    transmission_range: float
    d: int = 2
    hop_probs: tuple[float, ...] = (1.0,)
    delta_t: float = 0.0
    report_interval: float = 1.0
    mean_safe_time: float = 1.0

    def __post_init__(self) -> None:
        if not self.hop_probs:
            raise ValueError("hop_probs must not be empty")
        for p in self.hop_probs:
            if not 0.0 < p <= 1.0:
                raise ValueError("hop probabilities must lie in (0, 1]")

    @staticmethod
    def with_constant_p(
        n_nodes: int,
        area: float,
        query_range: float,
        transmission_range: float,
        p: float = 1.0,
        **kwargs,
    ) -> CostParams:
        return CostParams(
            n_nodes, area, query_range, transmission_range, hop_probs=(p,), **kwargs
        )

    @property
    def nodes_in_query_range(self) -> int:
        n = density(self.n_nodes, self.area, self.query_range)
        if n < 1:
            raise ValueError("no nodes expected inside the query range")
        return n

    @property
    def neighbors_per_node(self) -> int:
        n = density(self.n_nodes, self.area, self.transmission_range)
        if n <= 1:
            raise ValueError("node density too sparse for multi-hop routing")
        return n

    def hop_prob(self, i: int) -> float:
        """P_i with P_0 defined as 1 and the last value repeated beyond k."""
        if i <= 0:
            return 1.0
        if i <= len(self.hop_probs):
            return self.hop_probs[i - 1]
        return self.hop_probs[-1]

    def cumulative_prob(self, i: int) -> float:
        out = 1.0
        for j in range(1, i + 1):
            out *= self.hop_prob(j)
        return out


def query_spread_cost(params: CostParams, k: int) -> float:
    """Expected deliveries when the query floods k hop levels."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n_r = params.neighbors_per_node
    return sum(n_r**i * params.cumulative_prob(i) for i in range(1, k + 1))


def derive_ttl(params: CostParams, cap: int = 5) -> int:
    """Smallest hop count whose expected spread covers the query range."""
    target = params.nodes_in_query_range
    for k in range(1, cap + 1):
        if query_spread_cost(params, k) >= target:
            return k
    raise ValueError(
        f"spread never reaches {target} expected nodes within {cap} hops"
    )


def response_cost_centralized(params: CostParams, k: int) -> float:
    """Expected reply transmissions when every reached node reports itself."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n_r = params.neighbors_per_node
    return sum(n_r**i * i * params.cumulative_prob(i) for i in range(1, k + 1))


def response_cost_drsq(
    params: CostParams, k: int, reply_prob_mode: str = REPLY_PROB_AS_PRINTED
) -> float:
    """Expected reply transmissions when nodes forward local skylines only."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n_r = params.neighbors_per_node
    total = 0.0
    for i in range(1, k + 1):
        if reply_prob_mode == REPLY_PROB_AS_PRINTED:
            prob = params.hop_prob(k - i)
        elif reply_prob_mode == REPLY_PROB_CUMULATIVE:
            prob = params.cumulative_prob(i)
        else:
            raise ValueError(f"unknown reply_prob_mode {reply_prob_mode!r}")
        total += n_r**i * math.log(n_r**i) ** (params.d - 1) * prob
    return total


def total_cost(params: CostParams, mode: str, k: int | None = None) -> float:
    """Composed network cost for one query under the given approach."""
    if mode not in SPREAD_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    hops = derive_ttl(params) if k is None else k
    spread = query_spread_cost(params, hops)
    if mode == "snapshot-centralized":
        return spread + response_cost_centralized(params, hops)
    if mode == "snapshot-drsq":
        return spread + response_cost_drsq(params, hops)
    if mode == "continuous-centralized":
        if params.report_interval <= 0:
            raise ValueError("report interval must be > 0")
        rounds = params.delta_t / params.report_interval
        return rounds * (spread + response_cost_centralized(params, hops))
    if params.mean_safe_time <= 0:
        raise ValueError("mean safe time must be > 0")
    updates = params.delta_t / params.mean_safe_time
    return spread + updates * response_cost_drsq(params, hops)


def cost_table(params: CostParams, k: int | None = None) -> list[tuple[str, float]]:
    """All model quantities for one parameter set, for reporting."""
    hops = derive_ttl(params) if k is None else k
    rows = [
        ("nodes_in_query_range", float(params.nodes_in_query_range)),
        ("neighbors_per_node", float(params.neighbors_per_node)),
        ("expected_skyline_size", expected_skyline_size(params.n_nodes, params.d)),
        ("ttl", float(hops)),
        ("spread", query_spread_cost(params, hops)),
        ("reply_centralized", response_cost_centralized(params, hops)),
        ("reply_drsq", response_cost_drsq(params, hops)),
        ("total_snapshot_centralized", total_cost(params, "snapshot-centralized", hops)),
        ("total_snapshot_drsq", total_cost(params, "snapshot-drsq", hops)),
    ]
    if params.delta_t > 0:
        rows.append(
            ("total_continuous_centralized", total_cost(params, "continuous-centralized", hops))
        )
        rows.append(("total_continuous_dcrsq", total_cost(params, "continuous-dcrsq", hops)))
    return rows
