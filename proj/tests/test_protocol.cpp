#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "qnet/dense.hpp"
#include "qnet/errors.hpp"
#include "qnet/ledger.hpp"
#include "qnet/network.hpp"
#include "qnet/protocol.hpp"
#include "qnet/rng.hpp"

using namespace qnet;

namespace {

NetworkGraph two_nodes(Endowment endow = std::nullopt) {
    return NetworkGraph::build({{0, 1, std::nullopt, OpClass::TypeII},
                                {1, 1, std::nullopt, OpClass::TypeII}},
                               {make_edge(0, 1)}, endow);
}

ProtocolRun fresh_run(const NetworkGraph& net, std::uint64_t seed, TermList stocks = {}) {
    ProtocolRunConfig cfg;
    cfg.engine = EngineKind::Dense;
    cfg.seed = seed;
    cfg.initial_stocks = std::move(stocks);
    return make_run(net, cfg);
}

// random single-qubit state planted directly on a wire
CVec plant_random_qubit(ProtocolRun& run, int wire, RngStream& rng) {
    CVec target(2);
    target << rng.normal_complex(), rng.normal_complex();
    target.normalize();
    LocalUnitary u;
    u.matrix = state_preparation_unitary(target);
    run.state->apply_local(u, {wire});
    return target;
}

double overlap_fidelity(const CVec& a, const CVec& b) {
    CVec an = a.normalized(), bn = b.normalized();
    return std::norm(an.dot(bn));
}

int count_post_sends(const CausalTrace& trace, ChannelKind kind) {
    int n = 0;
    for (const Event& e : trace.events())
        n += e.kind == EventKind::Send && e.post_consumption && e.channel == kind;
    return n;
}

}  // namespace

TEST_CASE("make_run places qubits and honors initial stocks") {
    NetworkGraph net = two_nodes();
    ProtocolRun run = fresh_run(net, 1);
    CHECK(run.engine == EngineKind::Dense);
    CHECK(run.state->wire_count() == 2);
    CHECK(run.logical_wire == std::vector<int>{0, 1});
    CHECK(run.wire_logical == std::vector<int>{0, 1});
    CHECK(run.logical_of_slot(1, 0) == 1);
    CHECK(run.wire_of_logical(0) == 0);

    NetworkGraph tri = generate_topology(TopologyKind::Complete, {.nodes = 3, .qubits_per_node = 1});
    ProtocolRun ghz = fresh_run(tri, 2, {{stock_key("GHZ", {0, 1, 2}), 1}});
    CHECK(ghz.ledger.balance(stock_key("GHZ", {0, 1, 2})) == 1);
    REQUIRE(ghz.stock_wires.at(stock_key("GHZ", {0, 1, 2})).size() == 1);
    const auto& unit = ghz.stock_wires.at(stock_key("GHZ", {0, 1, 2}))[0];
    REQUIRE(unit.size() == 3);
    // the three halves are genuinely GHZ-correlated
    CHECK(ghz.state->mutual_information_bits({unit[0]}, {unit[1]}) == doctest::Approx(1.0));
    CHECK(ghz.state->subset_entropy_bits({unit[0], unit[1], unit[2]}) == doctest::Approx(0.0));
}

TEST_CASE("pair materialization draws down finite endowments") {
    NetworkGraph net = two_nodes(Endowment{2});
    ProtocolRun run = fresh_run(net, 3);
    SpeciesKey qq = stock_key("[qq]", {0, 1});

    CHECK(pair_available(run, 0, 1));
    CHECK(materialize_pair(run, 0, 1));
    CHECK(materialize_pair(run, 1, 0));
    CHECK(run.ledger.balance(qq) == 2);
    CHECK(run.endowment_drawn.at(make_edge(0, 1)) == 2);

    CHECK(!pair_available(run, 0, 1));
    CHECK(!materialize_pair(run, 0, 1));  // endowment spent
    CHECK(run.ledger.balance(qq) == 2);

    NetworkGraph free = two_nodes();
    ProtocolRun inf = fresh_run(free, 3);
    for (int i = 0; i < 5; ++i) CHECK(materialize_pair(inf, 0, 1));
    CHECK(inf.ledger.balance(qq) == 5);
    CHECK_THROWS_AS(materialize_pair(inf, 0, 0), SemanticError);
}

TEST_CASE("teleportation is exact and settles its resource account") {
    NetworkGraph net = two_nodes();
    RngStream prep(42);
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        ProtocolRun run = fresh_run(net, seed);
        CVec target = plant_random_qubit(run, 0, prep);

        TeleportResult res = teleport(run, 0, 0, 1);
        CHECK(res.logical == 0);

        // the moved qubit keeps its logical id on a new wire
        CHECK(run.wire_of_logical(0) != 0);
        CHECK(run.reg.slot_occupied(1, res.dst_slot));
        CHECK(run.reg.used_slots(0) == 0);

        CVec logical = state_in_logical_order(run);
        // logical 1 (node 1's original qubit) still |0>; logical 0 carries the state
        CVec expected(4);
        expected << target[0], target[1], 0, 0;
        CHECK(overlap_fidelity(logical, expected) == doctest::Approx(1.0).epsilon(1e-12));

        CHECK(run.ledger.consumed_totals().at(stock_key("[qq]", {0, 1})) == 1);
        CHECK(count_post_sends(run.trace, ChannelKind::Classical) == 2);
        CHECK(run.trace.validate().ok());

        InequalityCheck ineq =
            check_inequality(run.trace, run.ledger, run.achieved, teleport_inequality(0, 1));
        CHECK(ineq.pass);
    }
}

TEST_CASE("superdense coding transmits both bits") {
    NetworkGraph net = two_nodes();
    for (int msg = 0; msg < 4; ++msg) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            ProtocolRun run = fresh_run(net, seed * 31 + msg);
            int decoded = superdense_send(run, 0, 1, msg);
            CHECK(decoded == msg);
            CHECK(count_post_sends(run.trace, ChannelKind::Quantum) == 1);
            InequalityCheck ineq =
                check_inequality(run.trace, run.ledger, run.achieved, superdense_inequality(0, 1));
            CHECK(ineq.pass);
            CHECK(run.trace.validate().ok());
        }
    }
    ProtocolRun run = fresh_run(net, 9);
    CHECK_THROWS_AS(superdense_send(run, 0, 1, 4), SemanticError);
}

TEST_CASE("entanglement swapping leaves a bell pair across the ends") {
    NetworkGraph net = generate_topology(TopologyKind::Path, {.nodes = 3, .qubits_per_node = 1});
    ProtocolRun run = fresh_run(net, 5);
    REQUIRE(materialize_pair(run, 0, 1));
    REQUIRE(materialize_pair(run, 1, 2));

    entanglement_swap(run, 1, 0, 2);

    SpeciesKey ends = stock_key("[qq]", {0, 2});
    CHECK(run.ledger.balance(ends) == 1);
    REQUIRE(run.stock_wires.at(ends).size() == 1);
    const auto& unit = run.stock_wires.at(ends)[0];
    CHECK(run.state->mutual_information_bits({unit[0]}, {unit[1]}) ==
          doctest::Approx(2.0).epsilon(1e-12));

    InequalityCheck ineq =
        check_inequality(run.trace, run.ledger, run.achieved, swap_inequality(1, 0, 2));
    CHECK(ineq.pass);
    CHECK(run.trace.validate().ok());
}

TEST_CASE("swap chains stitch longer paths") {
    NetworkGraph net = generate_topology(TopologyKind::Path, {.nodes = 4, .qubits_per_node = 1});
    for (bool parallel : {false, true}) {
        ProtocolRun run = fresh_run(net, parallel ? 8 : 7);
        swap_chain(run, {0, 1, 2, 3}, parallel);
        SpeciesKey ends = stock_key("[qq]", {0, 3});
        REQUIRE(run.stock_wires.contains(ends));
        const auto& unit = run.stock_wires.at(ends).back();
        CHECK(run.state->mutual_information_bits({unit[0]}, {unit[1]}) ==
              doctest::Approx(2.0).epsilon(1e-12));
        // three hops drawn from the endowments
        CHECK(run.ledger.consumed_totals().at(stock_key("[qq]", {0, 1})) == 1);
        CHECK(run.ledger.consumed_totals().at(stock_key("[qq]", {1, 2})) == 1);
        CHECK(run.ledger.consumed_totals().at(stock_key("[qq]", {2, 3})) == 1);
    }
    ProtocolRun run = fresh_run(net, 9);
    CHECK_THROWS_AS(swap_chain(run, {0, 2}, false), SemanticError);     // too short
    CHECK_THROWS_AS(swap_chain(run, {0, 2, 1}, false), SemanticError);  // 0-2 is not an edge
}

TEST_CASE("distributed cnot equals the local gate") {
    NetworkGraph net = two_nodes();
    RngStream prep(77);
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        ProtocolRun run = fresh_run(net, seed);
        CVec c = plant_random_qubit(run, 0, prep);
        CVec t = plant_random_qubit(run, 1, prep);

        distributed_cnot(run, 0, 1);

        // expected: CNOT with logical 0 controlling logical 1
        CVec in(4);
        for (int i = 0; i < 4; ++i) in[i] = c[i & 1] * t[(i >> 1) & 1];
        CVec expected = in;
        std::swap(expected[1], expected[3]);

        CVec logical = state_in_logical_order(run);
        CHECK(overlap_fidelity(logical, expected) == doctest::Approx(1.0).epsilon(1e-12));

        InequalityCheck ineq = check_inequality(run.trace, run.ledger, run.achieved,
                                                distributed_cnot_inequality(0, 1));
        CHECK(ineq.pass);
        CHECK(run.trace.validate().ok());
    }
}

TEST_CASE("controlled teleportation needs the controller") {
    NetworkGraph net = generate_topology(TopologyKind::Complete, {.nodes = 3, .qubits_per_node = 1});
    TermList ghz = {{stock_key("GHZ", {0, 1, 2}), 1}};
    RngStream prep(99);

    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        ProtocolRun run = fresh_run(net, seed, ghz);
        CVec target = plant_random_qubit(run, run.reg.wire_of(0, 0), prep);

        controlled_teleport_ghz(run, 0, 1, 2, true);

        const int got = run.wire_of_logical(0);
        MixedState rho = run.state->reduced({got});
        CMat want = CMat::Zero(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) want(i, j) = target[i] * std::conj(target[j]);
        CHECK((rho.rho - want).norm() < 1e-12);

        InequalityCheck ineq = check_inequality(run.trace, run.ledger, run.achieved,
                                                controlled_teleport_inequality(0, 1, 2));
        CHECK(ineq.pass);
    }

    // A defecting controller reveals nothing to the receiver. Absent the
    // controller's bits the receiver's knowledge is the average over the
    // measurement record, and every record bit is a fair coin regardless of
    // the input, so averaging the distinct conditional states weighs them
    // exactly. For basis inputs the receiver collapses to one of two
    // equiprobable states; their mean must not depend on the input.
    CMat averaged[2];
    for (int variant = 0; variant < 2; ++variant) {
        std::vector<CMat> clusters;
        for (std::uint64_t seed = 0; seed < 48; ++seed) {
            ProtocolRun run = fresh_run(net, seed, ghz);
            if (variant == 1) run.state->apply_gate({Gate::X, run.reg.wire_of(0, 0), 0});
            controlled_teleport_ghz(run, 0, 1, 2, false);
            REQUIRE(run.transient.contains(2));
            REQUIRE(run.transient.at(2).size() == 1);
            const int held = *run.transient.at(2).begin();
            CMat rho = run.state->reduced({held}).rho;
            bool seen = false;
            for (const CMat& c : clusters) seen = seen || (rho - c).norm() < 1e-6;
            if (!seen) clusters.push_back(rho);
        }
        REQUIRE(clusters.size() == 2);
        averaged[variant] = (clusters[0] + clusters[1]) / 2.0;
    }
    CHECK((averaged[0] - averaged[1]).norm() < 1e-12);
}

TEST_CASE("shared coins agree and convert entanglement to a classical bit") {
    NetworkGraph net = two_nodes();
    int heads = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        ProtocolRun run = fresh_run(net, seed);
        int coin = shared_coin(run, 0, 1);
        CHECK((coin == 0 || coin == 1));
        heads += coin;
        CHECK(run.ledger.consumed_totals().at(stock_key("[qq]", {0, 1})) == 1);
        TermList want = {{stock_key("[cc]", {0, 1}), 1}};
        REQUIRE(run.achieved.size() == 1);
        CHECK(run.achieved[0].key == want[0].key);
    }
    CHECK(heads > 8);
    CHECK(heads < 32);
}

TEST_CASE("compiled neighbor unitaries equal direct application") {
    NetworkGraph net = two_nodes();
    RngStream rng(2718);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ProtocolRun run = fresh_run(net, seed);
        plant_random_qubit(run, 0, rng);
        plant_random_qubit(run, 1, rng);
        CVec before = state_in_logical_order(run);

        LocalUnitary u;
        u.matrix = haar_unitary(2, rng);
        CompileResult res = compile_neighbor_unitary(run, u, 0, 1);
        CHECK((res.host == 0 || res.host == 1));
        CHECK(res.guest != res.host);
        CHECK(res.returned.size() == 1);

        CVec after = state_in_logical_order(run);
        CVec expected(4);
        expected.setZero();
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) expected[j] += u.matrix(j, i) * before[i];
        CHECK(overlap_fidelity(after, expected) == doctest::Approx(1.0).epsilon(1e-10));

        // each node still holds exactly its original block size
        CHECK(run.reg.used_slots(0) == 1);
        CHECK(run.reg.used_slots(1) == 1);
        CHECK(run.trace.validate().ok());
    }

    NetworkGraph apart = generate_topology(TopologyKind::Path, {.nodes = 3, .qubits_per_node = 1});
    ProtocolRun run = fresh_run(apart, 1);
    LocalUnitary u;
    u.matrix = haar_unitary(2, rng);
    CHECK_THROWS_AS(compile_neighbor_unitary(run, u, 0, 2), SemanticError);
}

TEST_CASE("scripts enforce their channel discipline") {
    NetworkGraph net = two_nodes();

    Script sends;
    sends.push_back({ScriptOp::Kind::MeasureZ, 0, {}, {0}, "m", "", -1, ChannelKind::Classical});
    sends.push_back({ScriptOp::Kind::Send, 0, {}, {}, "", "m", 1, ChannelKind::Classical});

    ProtocolRun lu = fresh_run(net, 1);
    CHECK_THROWS_AS(lu_script(lu, sends), SemanticError);

    ProtocolRun locc = fresh_run(net, 1);
    locc_round(locc, sends);  // classical send is allowed here
    CHECK(count_post_sends(locc.trace, ChannelKind::Classical) == 1);

    Script quantum = sends;
    quantum[1].channel = ChannelKind::Quantum;
    ProtocolRun locc2 = fresh_run(net, 1);
    CHECK_THROWS_AS(locc_round(locc2, quantum), SemanticError);

    // conditioned correction: m is planted by an X, sent over, applied
    Script flip;
    LocalUnitary x;
    x.gates = {{Gate::X, 0, 0}};
    flip.push_back({ScriptOp::Kind::Local, 0, x, {0}, "", "", -1, ChannelKind::Classical});
    flip.push_back({ScriptOp::Kind::MeasureZ, 0, {}, {0}, "m", "", -1, ChannelKind::Classical});
    flip.push_back({ScriptOp::Kind::Send, 0, {}, {}, "", "m", 1, ChannelKind::Classical});
    flip.push_back({ScriptOp::Kind::Local, 1, x, {0}, "", "m", -1, ChannelKind::Classical});
    ProtocolRun cond = fresh_run(net, 2);
    locc_round(cond, flip);
    RngStream mrng(0);
    CHECK(cond.state->measure_z(cond.reg.wire_of(1, 0), mrng) == 1);

    Script unknown;
    unknown.push_back({ScriptOp::Kind::Send, 0, {}, {}, "", "ghost", 1, ChannelKind::Classical});
    ProtocolRun missing = fresh_run(net, 3);
    CHECK_THROWS_AS(locc_round(missing, unknown), SemanticError);
}

TEST_CASE("depolarizing edge cases") {
    NetworkGraph net = two_nodes();
    ProtocolRun run = fresh_run(net, 1);
    CVec before = state_in_logical_order(run);
    apply_depolarizing(run, 0, 0.0);  // no-op
    CHECK((state_in_logical_order(run) - before).norm() < 1e-15);
    CHECK_THROWS_AS(apply_depolarizing(run, 0, 1.5), SemanticError);

    // p=1 scrambles the qubit to I/2 on average
    int changed = 0;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        ProtocolRun r = fresh_run(net, seed);
        r.state->apply_gate({Gate::H, 0, 0});
        apply_depolarizing(r, 0, 1.0);
        MixedState rho = r.state->reduced({0});
        if (std::abs(rho.rho(0, 1).real() - 0.5) > 1e-9) ++changed;
    }
    CHECK(changed > 20);  // X/Z/Y each flip the coherence sign or kill it
}

TEST_CASE("logical order readout needs amplitudes") {
    NetworkGraph net = two_nodes();
    ProtocolRunConfig cfg;
    cfg.engine = EngineKind::Stabilizer;
    cfg.seed = 1;
    ProtocolRun run = make_run(net, cfg);
    CHECK_THROWS_AS(state_in_logical_order(run), EngineError);
}
