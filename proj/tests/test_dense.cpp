#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "qnet/dense.hpp"
#include "qnet/errors.hpp"
#include "qnet/network.hpp"
#include "qnet/rng.hpp"

using namespace qnet;

namespace {

// Independent route: build the full 2^n matrix element-wise and multiply.
// U_full[j,i] = u[a(j),a(i)] when the non-acting bits of j and i agree.
CVec apply_via_full_matrix(const CVec& amps, const CMat& u, const std::vector<int>& acting) {
    const int n = [&] {
        int k = 0;
        while ((Eigen::Index{1} << k) < amps.size()) ++k;
        return k;
    }();
    const auto dim = amps.size();
    auto sub_index = [&](Eigen::Index full) {
        int a = 0;
        for (std::size_t k = 0; k < acting.size(); ++k)
            if ((full >> acting[k]) & 1) a |= 1 << k;
        return a;
    };
    auto rest_bits = [&](Eigen::Index full) {
        Eigen::Index r = full;
        for (int w : acting) r &= ~(Eigen::Index{1} << w);
        return r;
    };
    CMat full = CMat::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
            if (rest_bits(j) == rest_bits(i)) full(j, i) = u(sub_index(j), sub_index(i));
    (void)n;
    return full * amps;
}

PureState random_state(int n, RngStream& rng) {
    PureState s;
    s.amps = CVec(Eigen::Index{1} << n);
    for (Eigen::Index i = 0; i < s.amps.size(); ++i) s.amps[i] = rng.normal_complex();
    s.amps.normalize();
    return s;
}

}  // namespace

TEST_CASE("product state initialization is little-endian") {
    PureState s = init_product_state({{QubitInit::One}, {QubitInit::Zero}});
    REQUIRE(s.amps.size() == 4);
    CHECK(std::abs(s.amps[1] - cxd{1, 0}) < 1e-15);  // qubit 0 set -> index bit 0

    PureState p = init_product_state({{QubitInit::Plus}, {QubitInit::Zero}});
    CHECK(std::abs(p.amps[0] - cxd{M_SQRT1_2, 0}) < 1e-15);
    CHECK(std::abs(p.amps[1] - cxd{M_SQRT1_2, 0}) < 1e-15);
    CHECK(std::abs(p.amps[2]) < 1e-15);

    PureState c = init_product_state({{QubitInit::Custom, cxd{0.6, 0}, cxd{0, 0.8}}});
    CHECK(std::abs(c.amps[0] - cxd{0.6, 0}) < 1e-15);
    CHECK(std::abs(c.amps[1] - cxd{0, 0.8}) < 1e-15);
}

TEST_CASE("bell ghz and w preparations") {
    PureState s = init_product_state(std::vector<QubitInit>(2));
    prepare_bell(s, 0, 1);
    CHECK(std::abs(s.amps[0] - cxd{M_SQRT1_2, 0}) < 1e-15);
    CHECK(std::abs(s.amps[3] - cxd{M_SQRT1_2, 0}) < 1e-15);
    CHECK(std::abs(s.amps[1]) < 1e-15);

    PureState g = init_product_state(std::vector<QubitInit>(3));
    prepare_ghz(g, {0, 1, 2});
    CHECK(std::abs(g.amps[0] - cxd{M_SQRT1_2, 0}) < 1e-14);
    CHECK(std::abs(g.amps[7] - cxd{M_SQRT1_2, 0}) < 1e-14);

    PureState w = init_product_state(std::vector<QubitInit>(3));
    prepare_w(w, {0, 1, 2});
    const double a = 1.0 / std::sqrt(3.0);
    for (Eigen::Index i : {1, 2, 4}) CHECK(std::abs(w.amps[i] - cxd{a, 0}) < 1e-14);
    CHECK(std::abs(w.amps[0]) < 1e-14);
    CHECK(std::abs(w.amps[7]) < 1e-14);
}

TEST_CASE("named gates match their matrices") {
    RngStream rng(11);
    PureState s = random_state(3, rng);

    PureState s1 = s;
    apply_x(s1, 1);
    CMat x(2, 2);
    x << 0, 1, 1, 0;
    CVec ref = apply_via_full_matrix(s.amps, x, {1});
    CHECK((s1.amps - ref).norm() < 1e-13);

    PureState s2 = s;
    apply_h(s2, 2);
    CMat h(2, 2);
    h << M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2;
    ref = apply_via_full_matrix(s.amps, h, {2});
    CHECK((s2.amps - ref).norm() < 1e-13);

    PureState s3 = s;
    apply_cnot(s3, 0, 2);
    CMat cn = CMat::Zero(4, 4);  // control = gate bit 0, target = gate bit 1
    cn(0, 0) = 1;
    cn(3, 1) = 1;
    cn(2, 2) = 1;
    cn(1, 3) = 1;
    ref = apply_via_full_matrix(s.amps, cn, {0, 2});
    CHECK((s3.amps - ref).norm() < 1e-13);

    PureState s4 = s;
    apply_t_gate(s4, 0);
    CMat t = CMat::Identity(2, 2);
    t(1, 1) = std::polar(1.0, M_PI / 4);
    ref = apply_via_full_matrix(s.amps, t, {0});
    CHECK((s4.amps - ref).norm() < 1e-13);

    PureState s5 = s;
    apply_swap(s5, 0, 2);
    CMat sw = CMat::Zero(4, 4);
    sw(0, 0) = 1;
    sw(2, 1) = 1;
    sw(1, 2) = 1;
    sw(3, 3) = 1;
    ref = apply_via_full_matrix(s.amps, sw, {0, 2});
    CHECK((s5.amps - ref).norm() < 1e-13);
}

TEST_CASE("apply_unitary agrees with full-matrix application") {
    RngStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4;
        PureState s = random_state(n, rng);
        const int k = rng.uniform_int(1, 3);
        std::vector<int> acting;
        while (static_cast<int>(acting.size()) < k) {
            int w = rng.uniform_int(0, n - 1);
            bool dup = false;
            for (int v : acting) dup |= v == w;
            if (!dup) acting.push_back(w);
        }
        CMat u = haar_unitary(k, rng);
        CVec ref = apply_via_full_matrix(s.amps, u, acting);
        apply_unitary(s, u, acting);
        CHECK((s.amps - ref).norm() < 1e-12);
        CHECK(std::abs(s.amps.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("measurement collapses and respects outcome statistics") {
    RngStream rng(3);
    PureState basis = init_product_state({{QubitInit::One}, {QubitInit::Zero}});
    CHECK(measure_z(basis, 0, rng) == 1);
    CHECK(measure_z(basis, 1, rng) == 0);

    int ones = 0;
    for (int t = 0; t < 200; ++t) {
        RngStream r(100 + static_cast<std::uint64_t>(t));
        PureState s = init_product_state({{QubitInit::Plus}});
        int m = measure_z(s, 0, r);
        ones += m;
        // collapse: the surviving amplitude is a basis state
        CHECK(std::abs(std::abs(s.amps[m]) - 1.0) < 1e-12);
        CHECK(std::abs(s.amps[1 - m]) < 1e-12);
    }
    CHECK(ones > 60);
    CHECK(ones < 140);
}

TEST_CASE("wire pool add and drop") {
    PureState s = init_product_state({{QubitInit::Plus}});
    int w = add_wire(s);
    CHECK(w == 1);
    CHECK(s.amps.size() == 4);
    drop_top_wire(s);
    CHECK(s.amps.size() == 2);
}

TEST_CASE("partial trace of a bell pair is maximally mixed") {
    PureState s = init_product_state(std::vector<QubitInit>(2));
    prepare_bell(s, 0, 1);
    MixedState m = partial_trace(s, {0});
    CHECK((m.rho - CMat::Identity(2, 2) * 0.5).norm() < 1e-14);
    CHECK(deviation_from_uniform(m) < 1e-12);
    CHECK(std::abs(entropy_bits(m) - 1.0) < 1e-12);
}

TEST_CASE("reduction order: two-stage trace equals direct trace") {
    RngStream rng(19);
    PureState s = random_state(4, rng);
    MixedState two = partial_trace(s, {0, 1, 3});
    MixedState once = partial_trace(two, {0, 3});
    MixedState direct = partial_trace(s, {0, 3});
    CHECK((once.rho - direct.rho).norm() < 1e-12);
    CHECK(std::abs(once.rho.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("entropy and deviation spot values") {
    PureState w = init_product_state(std::vector<QubitInit>(3));
    prepare_w(w, {0, 1, 2});
    MixedState one = partial_trace(w, {0});
    // eigenvalues 2/3 and 1/3
    CHECK(std::abs(entropy_bits(one) - 0.91829583405448956) < 1e-12);
    CHECK(std::abs(deviation_from_uniform(one) - 1.0 / 3.0) < 1e-12);

    PureState z = init_product_state(std::vector<QubitInit>(1));
    MixedState pure = partial_trace(z, {0});
    CHECK(std::abs(deviation_from_uniform(pure) - 1.0) < 1e-14);
    CHECK(entropy_bits(pure) < 1e-12);
}

TEST_CASE("subset entropy uses the smaller side of the cut") {
    RngStream rng(23);
    PureState s = random_state(6, rng);
    // pure global state: S(A) = S(complement)
    double sa = subset_entropy(s, {0, 2});
    double sc = subset_entropy(s, {1, 3, 4, 5});
    CHECK(std::abs(sa - sc) < 1e-10);
    CHECK(subset_entropy(s, {}) < 1e-12);
}

TEST_CASE("mutual information spot values") {
    PureState b = init_product_state(std::vector<QubitInit>(2));
    prepare_bell(b, 0, 1);
    CHECK(std::abs(mutual_information(b, {0}, {1}) - 2.0) < 1e-12);

    PureState p = init_product_state({{QubitInit::Plus}, {QubitInit::Plus}});
    CHECK(std::abs(mutual_information(p, {0}, {1})) < 1e-12);

    PureState g = init_product_state(std::vector<QubitInit>(3));
    prepare_ghz(g, {0, 1, 2});
    CHECK(std::abs(mutual_information(g, {0}, {1}) - 1.0) < 1e-12);
}

TEST_CASE("l1 norm and trace distance") {
    CMat m(2, 2);
    m << 0, 1, 1, 0;
    CHECK(std::abs(l1_norm(m) - 2.0) < 1e-13);

    PureState s = init_product_state(std::vector<QubitInit>(2));
    prepare_bell(s, 0, 1);
    MixedState a = partial_trace(s, {0});
    MixedState b = partial_trace(s, {1});
    CHECK(trace_distance(a, b) < 1e-13);

    PureState zero = init_product_state(std::vector<QubitInit>(1));
    PureState one = init_product_state({{QubitInit::One}});
    MixedState mz = partial_trace(zero, {0});
    MixedState mo = partial_trace(one, {0});
    CHECK(std::abs(trace_distance(mz, mo) - 2.0) < 1e-13);  // max L1 distance, not halved
}

TEST_CASE("haar unitaries are unitary") {
    RngStream rng(31);
    for (int k = 1; k <= 3; ++k) {
        CMat u = haar_unitary(k, rng);
        CHECK((u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).norm() < 1e-12);
    }
    CHECK_THROWS_AS(haar_unitary(kMaxDensityQubits + 1, rng), SemanticError);
}

TEST_CASE("state preparation unitary maps zero to the target") {
    RngStream rng(37);
    CVec target(4);
    for (int i = 0; i < 4; ++i) target[i] = rng.normal_complex();
    CMat u = state_preparation_unitary(target);
    CHECK((u.adjoint() * u - CMat::Identity(4, 4)).norm() < 1e-12);
    CVec got = u.col(0);
    CVec want = target.normalized();
    // global phase already fixed by construction
    CHECK((got - want).norm() < 1e-12);
}

TEST_CASE("schmidt spectrum, convertibility, distillation") {
    PureState b = init_product_state(std::vector<QubitInit>(2));
    prepare_bell(b, 0, 1);
    std::vector<double> spec = schmidt_spectrum(b, {0});
    REQUIRE(spec.size() >= 2);
    CHECK(std::abs(spec[0] - 0.5) < 1e-12);
    CHECK(std::abs(spec[1] - 0.5) < 1e-12);
    CHECK(std::abs(distillation_rate(b, {0}) - 1.0) < 1e-12);

    PureState w = init_product_state(std::vector<QubitInit>(3));
    prepare_w(w, {0, 1, 2});
    CHECK(std::abs(distillation_rate(w, {0}) - 0.91829583405448956) < 1e-12);

    // uniform pair converts to anything; nothing converts up to it
    CHECK(nielsen_convertible({0.5, 0.5}, {1.0}));
    CHECK(!nielsen_convertible({1.0}, {0.5, 0.5}));
    CHECK(nielsen_convertible({0.5, 0.5}, {0.5, 0.5}));
    CHECK(nielsen_convertible({0.5, 0.5}, {0.75, 0.25}));
    CHECK(!nielsen_convertible({0.75, 0.25}, {0.5, 0.5}));
}

TEST_CASE("fidelity spot values") {
    PureState zero = init_product_state(std::vector<QubitInit>(1));
    PureState one = init_product_state({{QubitInit::One}});
    PureState plus = init_product_state({{QubitInit::Plus}});
    CHECK(std::abs(fidelity(zero, zero) - 1.0) < 1e-14);
    CHECK(fidelity(zero, one) < 1e-14);
    CHECK(std::abs(fidelity(zero, plus) - 0.5) < 1e-14);
}

TEST_CASE("qubit register placement and slot maintenance") {
    NetworkGraph net = generate_topology(TopologyKind::Path, {.nodes = 3, .qubits_per_node = 2});
    QubitRegister reg(net, 1, 2);

    CHECK(reg.network_qubits() == 6);
    CHECK(reg.initial_wires() == 9);
    CHECK(reg.rprime_id() == 3);
    CHECK(reg.dcenter_id() == 4);

    // canonical ordering: node id ascending, local slot ascending
    CHECK(reg.wire_of(0, 0) == 0);
    CHECK(reg.wire_of(1, 0) == 2);
    CHECK(reg.wire_of(2, 1) == 5);
    CHECK(reg.wire_of(3, 0) == 6);  // reference block
    CHECK(reg.wire_of(4, 1) == 8);  // data-center block

    CHECK(reg.protocol_wires(1) == std::vector<int>{2, 3});
    CHECK(reg.block_wires({0, 2}) == std::vector<int>{0, 1, 4, 5});

    // middle node capacity: 2 + max neighbor budget 2 = 4 slots
    CHECK(reg.slots(1) == 4);
    CHECK(reg.used_slots(1) == 2);
    int slot = reg.take_free_slot(1, 40);
    CHECK(slot == 2);
    CHECK(reg.slot_of(1, 40) == 2);
    CHECK(reg.used_slots(1) == 3);
    reg.clear(1, 0);
    reg.compact(1);
    CHECK(reg.used_slots(1) == 2);
    CHECK(reg.wire_of(1, 0) == 3);  // shifted down
    CHECK(reg.wire_of(1, 1) == 40);

    reg.take_free_slot(2, 50);
    reg.take_free_slot(2, 51);
    CHECK_THROWS_AS(reg.take_free_slot(2, 52), SemanticError);
}
