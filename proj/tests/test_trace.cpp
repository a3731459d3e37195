#include <doctest.h>

#include <set>
#include <vector>

#include "qnet/dense.hpp"
#include "qnet/errors.hpp"
#include "qnet/rng.hpp"
#include "qnet/trace.hpp"

using namespace qnet;

namespace {

Event ev(NodeId node, EventKind kind, std::vector<EventId> causes = {}, int wall = 0) {
    Event e;
    e.node = node;
    e.kind = kind;
    e.channel = kind == EventKind::Send || kind == EventKind::Receive ? ChannelKind::Classical
                                                                      : ChannelKind::None;
    e.causes = std::move(causes);
    e.wall_step = wall;
    return e;
}

// reachability closure over an explicit edge set
std::set<std::pair<EventId, EventId>> closure(int n, const std::set<std::pair<EventId, EventId>>& edges) {
    std::vector<std::set<EventId>> reach(static_cast<std::size_t>(n));
    for (int v = n - 1; v >= 0; --v) {
        for (const auto& [a, b] : edges)
            if (a == v) {
                reach[static_cast<std::size_t>(v)].insert(b);
                reach[static_cast<std::size_t>(v)].insert(reach[static_cast<std::size_t>(b)].begin(),
                                                          reach[static_cast<std::size_t>(b)].end());
            }
    }
    std::set<std::pair<EventId, EventId>> out;
    for (int v = 0; v < n; ++v)
        for (EventId w : reach[static_cast<std::size_t>(v)]) out.insert({v, w});
    return out;
}

}  // namespace

TEST_CASE("record assigns ids and lane edges") {
    CausalTrace t;
    EventId a = t.record(ev(0, EventKind::Local));
    EventId b = t.record(ev(0, EventKind::Local, {}, 1));
    EventId c = t.record(ev(1, EventKind::Local, {a}, 1));

    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(t.size() == 3);
    CHECK(t.lane(0) == std::vector<EventId>{a, b});
    CHECK(t.lane(1) == std::vector<EventId>{c});
    CHECK(t.edges().contains({a, b}));  // implicit lane edge
    CHECK(t.edges().contains({a, c}));  // explicit cause
    CHECK(t.lane_nodes() == std::vector<NodeId>{0, 1});

    CHECK_THROWS_AS(t.record(ev(2, EventKind::Local, {99})), SemanticError);
    CHECK_THROWS_AS(t.record(ev(2, EventKind::Local, {-1})), SemanticError);
}

TEST_CASE("happened_before is the strict causal order") {
    CausalTrace t;
    EventId a = t.record(ev(0, EventKind::Send));
    EventId b = t.record(ev(1, EventKind::Receive, {a}, 1));
    EventId c = t.record(ev(1, EventKind::Local, {}, 2));
    EventId d = t.record(ev(2, EventKind::Local));

    CHECK(t.happened_before(a, b));
    CHECK(t.happened_before(a, c));  // through node 1's lane
    CHECK(!t.happened_before(b, a));
    CHECK(!t.happened_before(a, a));  // strict
    CHECK(!t.happened_before(a, d));
    CHECK(!t.happened_before(d, a));  // spacelike pair

    std::set<EventId> fut = t.future_cone(a);
    CHECK(fut == std::set<EventId>{a, b, c});
    std::set<EventId> past = t.past_cone(c);
    CHECK(past == std::set<EventId>{a, b, c});
}

TEST_CASE("hasse reduction drops exactly the implied edges") {
    CausalTrace t;
    EventId a = t.record(ev(0, EventKind::Local));
    EventId b = t.record(ev(0, EventKind::Local, {}, 1));
    EventId c = t.record(ev(0, EventKind::Local, {a}, 2));  // a->c implied via b

    auto reduced = t.hasse_reduce();
    CHECK(reduced.contains({a, b}));
    CHECK(reduced.contains({b, c}));
    CHECK(!reduced.contains({a, c}));
    (void)c;
}

TEST_CASE("hasse reduction preserves the reachability closure on random dags") {
    RngStream rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 30;
        CausalTrace t;
        for (int i = 0; i < n; ++i) {
            std::vector<EventId> causes;
            for (int j = 0; j < i; ++j)
                if (rng.uniform() < 0.12) causes.push_back(j);
            t.record(ev(i % 4, EventKind::Local, causes, i));
        }
        auto reduced = t.hasse_reduce();
        CHECK(closure(n, t.edges()) == closure(n, reduced));
        // minimality: removing any reduced edge loses reachability
        for (const auto& e : reduced) {
            auto fewer = reduced;
            fewer.erase(e);
            CHECK(!closure(n, fewer).contains(e));
        }
    }
}

TEST_CASE("validate accepts well-formed traces") {
    CausalTrace t;
    EventId s = t.record(ev(0, EventKind::Send));
    t.record(ev(1, EventKind::Receive, {s}, 1));
    t.record(ev(1, EventKind::Local, {}, 2));
    ValidationReport rep = t.validate();
    CHECK(rep.ok());
}

TEST_CASE("validate flags cycles from raw edge insertion") {
    CausalTrace t;
    EventId a = t.record(ev(0, EventKind::Local));
    EventId b = t.record(ev(0, EventKind::Local, {}, 1));
    t.add_edge(b, a);
    ValidationReport rep = t.validate();
    REQUIRE(!rep.ok());
    bool cycle = false;
    for (const auto& f : rep.findings) cycle |= f.code == "CycleDetected";
    CHECK(cycle);
    CHECK_THROWS_AS(t.hasse_reduce(), SemanticError);
}

TEST_CASE("validate flags unpaired and mismatched messages") {
    // receive without a send cause
    CausalTrace t1;
    t1.record(ev(0, EventKind::Local));
    t1.record(ev(1, EventKind::Receive, {0}, 1));
    bool pairing = false;
    for (const auto& f : t1.validate().findings) pairing |= f.code == "PairingViolation";
    CHECK(pairing);

    // one send matched by two receives
    CausalTrace t2;
    EventId s = t2.record(ev(0, EventKind::Send));
    t2.record(ev(1, EventKind::Receive, {s}, 1));
    t2.record(ev(2, EventKind::Receive, {s}, 1));
    pairing = false;
    for (const auto& f : t2.validate().findings) pairing |= f.code == "PairingViolation";
    CHECK(pairing);

    // channel kinds differ between the ends
    CausalTrace t3;
    Event se = ev(0, EventKind::Send);
    se.channel = ChannelKind::Quantum;
    EventId sq = t3.record(se);
    t3.record(ev(1, EventKind::Receive, {sq}, 1));
    pairing = false;
    for (const auto& f : t3.validate().findings) pairing |= f.code == "PairingViolation";
    CHECK(pairing);
}

TEST_CASE("validate flags lane order violations") {
    CausalTrace t;
    t.record(ev(0, EventKind::Local, {}, 5));
    t.record(ev(0, EventKind::Local, {}, 2));  // wall step decreases on the lane
    bool lane = false;
    for (const auto& f : t.validate().findings) lane |= f.code == "LaneOrderViolation";
    CHECK(lane);
}

TEST_CASE("event kind and channel names round-trip") {
    for (EventKind k : {EventKind::Local, EventKind::Send, EventKind::Receive,
                        EventKind::ResourceCreate, EventKind::ResourceConsume})
        CHECK(event_kind_from_string(event_kind_name(k)) == k);
    for (ChannelKind c : {ChannelKind::Classical, ChannelKind::Quantum, ChannelKind::None})
        CHECK(channel_kind_from_string(channel_kind_name(c)) == c);
    CHECK_THROWS_AS(event_kind_from_string("telepathy"), ParseError);
}

TEST_CASE("event detector fires only on state change") {
    EventDetector det(1e-6);
    PureState zero = init_product_state(std::vector<QubitInit>(1));
    MixedState rho0 = partial_trace(zero, {0});

    CHECK(!det.observe(0, rho0));  // baseline
    CHECK(!det.observe(0, rho0));  // unchanged

    PureState plus = init_product_state({{QubitInit::Plus}});
    MixedState rho1 = partial_trace(plus, {0});
    CHECK(det.observe(0, rho1));

    // sub-epsilon drift stays silent
    EventDetector coarse(0.5);
    CHECK(!coarse.observe(3, rho0));
    MixedState nudged = rho0;
    nudged.rho(0, 0) -= 0.01;
    nudged.rho(1, 1) += 0.01;
    CHECK(!coarse.observe(3, nudged));

    CHECK_THROWS_AS(EventDetector(0.0), SemanticError);
}
