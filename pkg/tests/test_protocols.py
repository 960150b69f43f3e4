import math
import random

from rangeskyline.kinematics import MotionState, WaypointPlan
from rangeskyline.netsim import (
    LinkModel,
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
    predict_timeline,
    relevant_union,
)
from rangeskyline.skyline import AttributeVector, DataObject, QuerySnapshot, range_skyline


AREA = (1000.0, 1000.0)


def static_plan(x, y, horizon=60.0):
    return WaypointPlan((float(x), float(y)), AREA, (0.0, 0.0), horizon, random.Random(0))


def moving_plan(x, y, target, speed, horizon=60.0):
    return WaypointPlan(
        (float(x), float(y)), AREA, (speed, speed), horizon,
        random.Random(0), waypoints=[target], speeds=[speed],
    )


def sensor(node_id, plan, attr):
    return NodeRuntime(node_id, plan, AttributeVector((float(attr),)))


def query_node(node_id, plan):
    return NodeRuntime(node_id, plan, None)


def carried(node_id, x, y, vx, vy, attr, observed_at=0.0):
    return DataObject(node_id, (float(x), float(y)), (float(vx), float(vy)),
                      AttributeVector((float(attr),)), observed_at)


def run_query(nodes, issuer_id, R, ttl, mode, r=60.0, p=1.0, seed=0, window=None,
              horizon=60.0, continuous_setup=False):
    link = LinkModel(transmission_range=r, delivery_prob=p)
    sim = Simulator(nodes, link, seed=seed, horizon=horizon)
    proto = QueryProtocol(sim, mode=mode)
    issue_at = 1.0
    win = (issue_at, issue_at) if window is None else (issue_at, issue_at + window)
    desc = QueryDescriptor(
        query_id=1, issuer=issuer_id,
        issuer_state=MotionState((0.0, 0.0), (0.0, 0.0), issue_at),
        range_R=R, window=win, ttl=ttl,
    )
    if continuous_setup:
        proto.schedule_mobility()
        proto.schedule_contacts()
    proto.issue(desc, issue_at)
    sim.run()
    return sim, proto, proto.outcomes[1]


def oracle_snapshot(nodes, issuer_id, R, t):
    issuer = next(n for n in nodes if n.id == issuer_id)
    q = QuerySnapshot(issuer.position(t), R)
    objs = {
        DataObject(n.id, n.position(t), (0.0, 0.0), n.attrs, t)
        for n in nodes
        if n.attrs is not None
    }
    return {o.id for o in range_skyline(q, objs)}


# ---------------------------------------------------------------------------
# sensor-side merging under dominance (snapshot path)
# ---------------------------------------------------------------------------

def test_intermediate_merges_and_prunes_received_sets():
    # leaves reply themselves; the relay keeps itself and the undominated
    # leaf, prunes the leaf it dominates and the one its neighbor dominates
    nodes = [
        query_node(0, static_plan(0, 0)),
        sensor(4, static_plan(50, 0), 2.0),     # relay, incomparable with 5
        sensor(3, static_plan(100, 10), 3.0),   # dominated by 5
        sensor(5, static_plan(95, 0), 1.0),     # kept
        sensor(11, static_plan(105, -5), 9.0),  # dominated by 4
    ]
    sim, proto, outcome = run_query(nodes, 0, R=120.0, ttl=1, mode=MODE_DISTRIBUTED, r=60.0)
    assert outcome.final_snapshot is not None
    assert {o.id for o in outcome.final_snapshot} == {4, 5}
    # the relay forwarded exactly its two skyline members
    assert outcome.accessed_objects == 2


def test_end_node_with_no_neighbors_reports_itself():
    nodes = [query_node(0, static_plan(0, 0)), sensor(1, static_plan(40, 0), 5.0)]
    sim, proto, outcome = run_query(nodes, 0, R=80.0, ttl=0, mode=MODE_DISTRIBUTED, r=60.0)
    assert {o.id for o in outcome.final_snapshot} == {1}


def test_dominated_self_is_excluded_from_reply():
    # merge step: a received object that dominates the node's own record
    # keeps the node out of its reported set
    state_known = {
        1: carried(1, 50, 0, 0, 0, attr=9.0),  # own record, dominated
        2: carried(2, 45, 5, 0, 0, attr=1.0),  # received, dominating
    }
    desc = QueryDescriptor(
        1, 0, MotionState((0.0, 0.0), (0.0, 0.0), 0.0), 100.0, (0.0, 0.0), 1
    )
    from rangeskyline.protocols import SensorQueryState
    state = SensorQueryState(descriptor=desc, known=state_known)
    batch = QueryProtocol._compose_batch(None, state, 0.0)
    assert [o.id for o in batch] == [2]


def test_out_of_range_candidate_filtered_at_issuer():
    # a far object with great attrs survives local merging but not the final
    # range check at the query node
    nodes = [
        query_node(0, static_plan(0, 0)),
        sensor(1, static_plan(50, 0), 5.0),
        sensor(2, static_plan(100, 0), 0.5),  # outside R=80
    ]
    sim, proto, outcome = run_query(nodes, 0, R=80.0, ttl=1, mode=MODE_DISTRIBUTED, r=60.0)
    assert {o.id for o in outcome.final_snapshot} == {1}


# ---------------------------------------------------------------------------
# snapshot end-to-end vs oracle
# ---------------------------------------------------------------------------

def random_static_world(rng, n, span=300.0):
    nodes = [query_node(0, static_plan(span / 2, span / 2))]
    for i in range(1, n + 1):
        nodes.append(
            sensor(i, static_plan(rng.uniform(0, span), rng.uniform(0, span)),
                   rng.uniform(0, 10))
        )
    return nodes


def test_distributed_snapshot_equals_oracle_on_random_static_worlds():
    rng = random.Random(1001)
    for trial in range(10):
        nodes = random_static_world(rng, 30)
        sim, proto, outcome = run_query(nodes, 0, R=100.0, ttl=2, mode=MODE_DISTRIBUTED, r=90.0, seed=trial)
        expected = oracle_snapshot(nodes, 0, 100.0, 1.0)
        assert {o.id for o in outcome.final_snapshot} == expected


def test_centralized_snapshot_matches_distributed_and_oracle():
    rng = random.Random(77)
    nodes = random_static_world(rng, 25)
    _, _, dist_out = run_query(nodes, 0, R=100.0, ttl=2, mode=MODE_DISTRIBUTED, r=90.0)
    nodes2 = random_static_world(random.Random(77), 25)
    sim_c, _, cent_out = run_query(nodes2, 0, R=100.0, ttl=5, mode=MODE_CENTRALIZED, r=90.0)
    expected = oracle_snapshot(nodes, 0, 100.0, 1.0)
    assert {o.id for o in dist_out.final_snapshot} == expected
    assert {o.id for o in cent_out.final_snapshot} == expected


def test_distributed_sends_fewer_messages_than_centralized():
    rng = random.Random(31)
    nodes = random_static_world(rng, 40)
    sim_d, _, _ = run_query(nodes, 0, R=100.0, ttl=2, mode=MODE_DISTRIBUTED, r=90.0)
    nodes2 = random_static_world(random.Random(31), 40)
    sim_c, _, _ = run_query(nodes2, 0, R=100.0, ttl=5, mode=MODE_CENTRALIZED, r=90.0)
    assert sim_d.stats.sent_total < sim_c.stats.sent_total


def test_centralized_reply_count_matches_hand_count():
    # line: issuer - a - b; a replies 1 hop, b replies 2 hops: 3 reply sends
    nodes = [
        query_node(0, static_plan(0, 0)),
        sensor(1, static_plan(50, 0), 1.0),
        sensor(2, static_plan(100, 0), 2.0),
    ]
    sim, proto, outcome = run_query(nodes, 0, R=150.0, ttl=5, mode=MODE_CENTRALIZED, r=60.0)
    assert sim.stats.sent[MSG_REPLY] == 3
    assert outcome.accessed_objects == 2


def test_response_time_is_positive_and_bounded():
    rng = random.Random(5)
    nodes = random_static_world(rng, 20)
    sim, proto, outcome = run_query(nodes, 0, R=100.0, ttl=2, mode=MODE_DISTRIBUTED, r=90.0)
    bound = 4.0 * 3 * sim.link.hop_delay
    assert outcome.response_time is not None
    assert 0.0 < outcome.response_time <= bound + 1e-9


# ---------------------------------------------------------------------------
# predicted timelines
# ---------------------------------------------------------------------------

def test_timeline_validity_ends_at_predicted_leave_time():
    center = MotionState((0.0, 0.0), (0.0, 0.0), 0.0)
    leaver = carried(7, 80, 0, 10, 0, attr=1.0)
    tl = predict_timeline(center, 100.0, [leaver], (0.0, 10.0), 0.0)
    assert [({o.id for o in sky}, span) for sky, span in tl] == [
        ({7}, (0.0, 2.0)),
        (set(), (2.0, 10.0)),
    ]


def test_timeline_of_departing_and_entering_candidates():
    # two fast candidates exit the range at t=1 while two others enter;
    # the per-segment skylines swap wholesale at the crossing instant
    center = MotionState((0.0, 0.0), (0.0, 0.0), 0.0)
    objs = [
        carried(4, 88, 0, 12, 0, attr=1.0),
        carried(5, 76, 0, 24, 0, attr=2.0),
        carried(3, 105, 0, -5, 0, attr=4.0),
        carried(11, 0, 103, 0, -3, attr=3.0),
    ]
    tl = predict_timeline(center, 100.0, objs, (0.0, 3.0), 0.0)
    got = [({o.id for o in sky}, span) for sky, span in tl]
    assert got == [({4, 5}, (0.0, 1.0)), ({3, 11}, (1.0, 3.0))]


def test_timeline_distance_flip_changes_skyline_mid_window():
    # b starts closer; a overtakes at t=2 and dominates from then on
    center = MotionState((0.0, 0.0), (0.0, 0.0), 0.0)
    a = carried(1, 60, 0, -10, 0, attr=1.0)
    b = carried(2, 40, 0, 0, 0, attr=2.0)
    tl = predict_timeline(center, 100.0, [a, b], (0.0, 4.0), 0.0)
    got = [({o.id for o in sky}, span) for sky, span in tl]
    assert got == [({1, 2}, (0.0, 2.0)), ({1}, (2.0, 4.0))]


def test_snapshot_window_degenerates_to_range_skyline():
    center = MotionState((0.0, 0.0), (0.0, 0.0), 0.0)
    near = carried(1, 10, 0, 0, 0, attr=5.0)
    far = carried(2, 200, 0, 0, 0, attr=1.0)
    tl = predict_timeline(center, 50.0, [near, far], (2.0, 2.0), 0.0)
    assert len(tl) == 1
    assert {o.id for o in tl[0][0]} == {1}


def test_relevant_union_collects_all_segment_members():
    center = MotionState((0.0, 0.0), (0.0, 0.0), 0.0)
    objs = [
        carried(1, 80, 0, 10, 0, attr=1.0),
        carried(2, 40, 0, 0, 0, attr=2.0),
    ]
    tl = predict_timeline(center, 100.0, objs, (0.0, 10.0), 0.0)
    assert {o.id for o in relevant_union(tl)} == {1, 2}


# ---------------------------------------------------------------------------
# continuous end-to-end
# ---------------------------------------------------------------------------

def test_static_continuous_timeline_is_single_interval_equal_oracle():
    rng = random.Random(2002)
    nodes = random_static_world(rng, 20)
    sim, proto, outcome = run_query(
        nodes, 0, R=100.0, ttl=2, mode=MODE_DISTRIBUTED, r=90.0, window=8.0, continuous_setup=True
    )
    expected = oracle_snapshot(nodes, 0, 100.0, 1.0)
    realized = outcome.realized_timeline()
    # after the collection delay the realized sets must all equal the oracle
    settled = [seg for seg in realized if seg[1][0] >= 1.0 + outcome.response_time]
    assert settled, "no settled segment found"
    for sky, _ in settled:
        assert {o.id for o in sky} == expected


def test_static_continuous_sends_no_update_messages():
    rng = random.Random(303)
    nodes = random_static_world(rng, 20)
    sim, proto, outcome = run_query(
        nodes, 0, R=100.0, ttl=2, mode=MODE_DISTRIBUTED, r=90.0, window=8.0, continuous_setup=True
    )
    assert sim.stats.sent.get(MSG_UPDATE, 0) == 0


def test_relay_known_entrant_appears_in_predicted_result():
    # the entrant sits outside R but inside the relay's radio range at issue
    # time; the relay's prediction announces its entry ahead of time
    entrant_plan = moving_plan(150, 0, (20.0, 0.0), speed=10.0)
    nodes = [
        query_node(0, static_plan(0, 0)),
        sensor(1, static_plan(95, 0), 5.0),           # relay, inside R=100
        NodeRuntime(8, entrant_plan, AttributeVector((1.0,))),
    ]
    sim, proto, outcome = run_query(
        nodes, 0, R=100.0, ttl=1, mode=MODE_DISTRIBUTED, r=100.0, window=8.0,
        continuous_setup=True,
    )
    # entrant at x=150-10t crosses R=100 at t=5, i.e. 4 s into the window;
    # it overtakes and dominates the relay from t=5.5
    realized = outcome.realized_timeline()
    at_entry = [sky for sky, (a, b) in realized if a <= 6.5 <= b]
    assert at_entry and any(o.id == 8 for o in at_entry[0])
    before = [sky for sky, (a, b) in realized if a <= 3.0 <= b]
    assert before and all(o.id != 8 for o in before[0])


def test_centralized_continuous_runs_report_rounds():
    nodes = [
        query_node(0, static_plan(0, 0)),
        sensor(1, static_plan(40, 0), 1.0),
        sensor(2, static_plan(80, 0), 2.0),
    ]
    sim, proto, outcome = run_query(
        nodes, 0, R=100.0, ttl=5, mode=MODE_CENTRALIZED, r=60.0, window=10.0
    )
    # initial reports plus nine re-report rounds, two sensors each: the far
    # sensor's report costs two hops
    assert sim.stats.sent[MSG_REPLY] == 3
    assert sim.stats.sent[MSG_UPDATE] == 9 * 3
    assert outcome.accessed_objects == 10 * 2


def test_same_seed_identical_protocol_trace():
    def one(seed):
        rng = random.Random(404)
        nodes = random_static_world(rng, 15)
        sim, _, _ = run_query(nodes, 0, R=100.0, ttl=2, mode=MODE_DISTRIBUTED, r=90.0, seed=seed, p=0.8)
        return sim.trace

    assert one(9) == one(9)


def test_unreached_region_yields_empty_result_without_crash():
    nodes = [query_node(0, static_plan(0, 0)), sensor(1, static_plan(500, 500), 1.0)]
    sim, proto, outcome = run_query(nodes, 0, R=80.0, ttl=2, mode=MODE_DISTRIBUTED, r=30.0)
    assert outcome.final_snapshot == frozenset()


def test_local_pruning_never_discards_a_global_skyline_member():
    # dominance against the query is global: partition the in-range objects
    # into arbitrary local groups, prune each, and the union of survivors
    # must still contain the full range-skyline
    from rangeskyline.skyline import point_skyline, range_skyline
    rng = random.Random(717)
    for _ in range(30):
        q = QuerySnapshot((0.0, 0.0), 100.0)
        pool = set()
        for i in range(rng.randint(2, 18)):
            ang = rng.uniform(0, 2 * math.pi)
            d = rng.uniform(0, 100)
            pool.add(
                carried(i, d * math.cos(ang), d * math.sin(ang), 0, 0,
                        attr=rng.uniform(0, 10))
            )
        groups = {}
        for o in pool:
            groups.setdefault(rng.randint(0, 3), set()).add(o)
        survivors = set()
        for g in groups.values():
            survivors |= point_skyline(q, g)
        assert range_skyline(q, pool) <= survivors


def test_empty_collection_is_flagged_low_confidence():
    nodes = [query_node(0, static_plan(0, 0)), sensor(1, static_plan(500, 500), 1.0)]
    _, _, outcome = run_query(nodes, 0, R=80.0, ttl=2, mode=MODE_DISTRIBUTED, r=30.0)
    assert outcome.low_confidence
    nodes2 = [query_node(0, static_plan(0, 0)), sensor(1, static_plan(40, 0), 1.0)]
    _, _, ok = run_query(nodes2, 0, R=80.0, ttl=1, mode=MODE_DISTRIBUTED, r=60.0)
    assert not ok.low_confidence


def test_predicted_segments_match_direct_skyline_at_samples():
    # per-segment sets must equal the plain range-skyline of extrapolated
    # positions at any instant inside the segment
    from rangeskyline.skyline import range_skyline
    rng = random.Random(808)
    for _ in range(40):
        center = MotionState(
            (rng.uniform(-20, 20), rng.uniform(-20, 20)),
            (rng.uniform(-3, 3), rng.uniform(-3, 3)),
        )
        objs = [
            carried(
                i,
                rng.uniform(-150, 150), rng.uniform(-150, 150),
                rng.uniform(-6, 6), rng.uniform(-6, 6),
                attr=rng.uniform(0, 5),
            )
            for i in range(rng.randint(1, 8))
        ]
        R = rng.uniform(40, 120)
        window = (0.0, rng.uniform(2.0, 12.0))
        tl = predict_timeline(center, R, objs, window, 0.0)
        # coverage: segments tile the window in order
        assert tl[0][1][0] == window[0]
        assert tl[-1][1][1] == window[1]
        for (_, (_, b)), (_, (a2, _)) in zip(tl, tl[1:]):
            assert a2 == b
        for sky, (a, b) in tl:
            for frac in (0.25, 0.5, 0.75):
                t = a + (b - a) * frac
                cx = center.position[0] + center.velocity[0] * t
                cy = center.position[1] + center.velocity[1] * t
                q = QuerySnapshot((cx, cy), R)
                moved = {
                    DataObject(o.id, o.position_at(t), o.velocity, o.attrs, t)
                    for o in objs
                }
                want = {o.id for o in range_skyline(q, moved)}
                assert {o.id for o in sky} == want, (a, b, t)
