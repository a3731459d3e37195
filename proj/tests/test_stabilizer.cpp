#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qnet/dense.hpp"
#include "qnet/errors.hpp"
#include "qnet/gates.hpp"
#include "qnet/rng.hpp"
#include "qnet/stabilizer.hpp"

using namespace qnet;

namespace {

GateList random_clifford_circuit(int n, int depth, RngStream& rng) {
    GateList ops;
    for (int i = 0; i < depth; ++i) {
        int pick = rng.uniform_int(0, 5);
        int a = rng.uniform_int(0, n - 1);
        int b = a;
        while (n > 1 && b == a) b = rng.uniform_int(0, n - 1);
        switch (pick) {
            case 0: ops.push_back({Gate::H, a, 0}); break;
            case 1: ops.push_back({Gate::S, a, 0}); break;
            case 2: ops.push_back({Gate::X, a, 0}); break;
            case 3: ops.push_back({Gate::CNOT, a, b}); break;
            case 4: ops.push_back({Gate::CZ, a, b}); break;
            default: ops.push_back({Gate::SWAP, a, b}); break;
        }
    }
    return ops;
}

void apply_to_dense(PureState& s, const GateList& ops) {
    for (const GateOp& op : ops) {
        switch (op.g) {
            case Gate::H: apply_h(s, op.q0); break;
            case Gate::S: apply_s_gate(s, op.q0); break;
            case Gate::X: apply_x(s, op.q0); break;
            case Gate::Y: apply_y(s, op.q0); break;
            case Gate::Z: apply_z(s, op.q0); break;
            case Gate::CNOT: apply_cnot(s, op.q0, op.q1); break;
            case Gate::CZ: apply_cz(s, op.q0, op.q1); break;
            case Gate::SWAP: apply_swap(s, op.q0, op.q1); break;
            case Gate::T: apply_t_gate(s, op.q0); break;
        }
    }
}

}  // namespace

TEST_CASE("fresh tableau is the all-zero state") {
    StabilizerTableau tab(3);
    CHECK(tab.qubits() == 3);
    RngStream rng(1);
    for (int q = 0; q < 3; ++q) {
        CHECK(tab.measurement_deterministic(q));
        CHECK(tab.measure_z(q, rng) == 0);
    }
    CHECK(tab.rows_commute());
    CHECK(tab.full_rank());
}

TEST_CASE("bell pair entropies and correlations") {
    StabilizerTableau tab(2);
    tab.h(0);
    tab.cnot(0, 1);
    CHECK(tab.subset_entropy({0}) == 1);
    CHECK(tab.subset_entropy({1}) == 1);
    CHECK(tab.subset_entropy({0, 1}) == 0);
    CHECK(tab.mutual_information({0}, {1}) == 2);
    CHECK(tab.deviation_from_uniform({0}) == 0.0);

    RngStream rng(5);
    CHECK(!tab.measurement_deterministic(0));
    int m0 = tab.measure_z(0, rng);
    CHECK(tab.measurement_deterministic(1));
    CHECK(tab.measure_z(1, rng) == m0);
}

TEST_CASE("ghz outcomes agree across all qubits") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        StabilizerTableau tab(4);
        tab.h(0);
        for (int q = 1; q < 4; ++q) tab.cnot(0, q);
        RngStream rng(seed);
        int first = tab.measure_z(0, rng);
        for (int q = 1; q < 4; ++q) CHECK(tab.measure_z(q, rng) == first);
    }
}

TEST_CASE("deviation formula for pure and mixed subsets") {
    StabilizerTableau tab(2);
    // |0>: S=0, |A|=1 -> 2(1 - 2^-1) = 1
    CHECK(tab.deviation_from_uniform({0}) == doctest::Approx(1.0).epsilon(1e-15));
    tab.h(0);
    tab.cnot(0, 1);
    // bell half: S=1, |A|=1 -> 0
    CHECK(tab.deviation_from_uniform({0}) == doctest::Approx(0.0).epsilon(1e-15));
    // whole pair: S=0, |A|=2 -> 2(1 - 1/4) = 3/2
    CHECK(tab.deviation_from_uniform({0, 1}) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("tableau entropies match the dense engine on random circuits") {
    RngStream rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = rng.uniform_int(2, 6);
        GateList ops = random_clifford_circuit(n, 30, rng);

        StabilizerTableau tab(n);
        tab.apply(ops);
        PureState s = init_product_state(std::vector<QubitInit>(static_cast<std::size_t>(n)));
        apply_to_dense(s, ops);

        std::vector<int> a, b;
        for (int q = 0; q < n; ++q) (rng.uniform_int(0, 1) ? a : b).push_back(q);
        if (a.empty() || b.empty()) continue;

        CHECK(std::abs(tab.subset_entropy(a) - subset_entropy(s, a)) < 1e-9);
        CHECK(std::abs(static_cast<double>(tab.mutual_information(a, b)) -
                       mutual_information(s, a, b)) < 1e-9);
        CHECK(std::abs(tab.deviation_from_uniform(a) -
                       deviation_from_uniform(partial_trace(s, a))) < 1e-9);
        CHECK(tab.rows_commute());
        CHECK(tab.full_rank());
    }
}

TEST_CASE("measurements keep the tableau canonical and match dense statistics") {
    RngStream rng(123);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 4;
        GateList ops = random_clifford_circuit(n, 25, rng);
        StabilizerTableau tab(n);
        tab.apply(ops);
        RngStream mrng(trial);
        for (int q = 0; q < n; ++q) {
            int m = tab.measure_z(q, mrng);
            CHECK((m == 0 || m == 1));
            CHECK(tab.rows_commute());
            CHECK(tab.full_rank());
        }
        // post-measurement state is a computational basis state
        for (int q = 0; q < n; ++q) CHECK(tab.measurement_deterministic(q));
    }
}

TEST_CASE("add_qubit activates a fresh zero wire") {
    StabilizerTableau tab(2, 8);
    tab.h(0);
    tab.cnot(0, 1);
    int w = tab.add_qubit();
    CHECK(w == 2);
    CHECK(tab.qubits() == 3);
    RngStream rng(9);
    CHECK(tab.measurement_deterministic(w));
    CHECK(tab.measure_z(w, rng) == 0);
    // existing entanglement survives
    CHECK(tab.mutual_information({0}, {1}) == 2);
}

TEST_CASE("two-qubit clifford sampling covers the full group") {
    CHECK(two_qubit_clifford_count() == 11520);

    RngStream rng(2024);
    std::set<std::uint32_t> seen;
    for (int i = 0; i < 600; ++i) {
        GateList word = random_two_qubit_clifford(rng);
        for (const GateOp& op : word) {
            CHECK(is_clifford(op.g));
            CHECK(op.q0 >= 0);
            CHECK(op.q0 <= 1);
            if (is_two_qubit(op.g)) {
                CHECK(op.q1 >= 0);
                CHECK(op.q1 <= 1);
            }
        }
        seen.insert(two_qubit_clifford_code(word));
    }
    // 600 uniform draws from 11520 actions rarely collide more than a little
    CHECK(seen.size() > 550);

    // the identity word and an explicit identity circuit share a code
    CHECK(two_qubit_clifford_code({}) ==
          two_qubit_clifford_code({{Gate::X, 0, 0}, {Gate::X, 0, 0}}));
}
