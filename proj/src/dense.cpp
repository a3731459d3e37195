#include "qnet/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kEigClip = 1e-12;

void check_wire(const PureState& s, int q) {
    if (q < 0 || q >= s.wires()) throw EngineError("wire index " + std::to_string(q) + " out of range");
}

Eigen::Index insert_bit(Eigen::Index base, int pos, int bit) {
    Eigen::Index low = base & ((Eigen::Index{1} << pos) - 1);
    Eigen::Index high = base >> pos;
    return (high << (pos + 1)) | (static_cast<Eigen::Index>(bit) << pos) | low;
}

}  // namespace

PureState init_product_state(const std::vector<QubitInit>& per_qubit) {
    const int n = static_cast<int>(per_qubit.size());
    if (n < 1) throw EngineError("empty register");
    if (n > kMaxStatevectorQubits) throw EngineError("statevector cap exceeded: " + std::to_string(n));
    PureState s;
    s.amps = CVec::Zero(Eigen::Index{1} << n);
    s.amps[0] = 1.0;
    for (int q = 0; q < n; ++q) {
        const QubitInit& init = per_qubit[q];
        switch (init.kind) {
            case QubitInit::Zero:
                break;
            case QubitInit::One:
                apply_x(s, q);
                break;
            case QubitInit::Plus:
                apply_h(s, q);
                break;
            case QubitInit::Custom: {
                double norm = std::norm(init.a0) + std::norm(init.a1);
                if (std::abs(norm - 1.0) > kNormTol)
                    throw EngineError("BadAmplitudes: custom qubit state not normalized");
                CMat u(2, 2);
                // unitary with first column (a0, a1)
                u << init.a0, -std::conj(init.a1), init.a1, std::conj(init.a0);
                apply_unitary(s, u, {q});
                break;
            }
        }
    }
    return s;
}

namespace {

void require_fresh(const PureState& s, const std::vector<int>& qubits) {
    // every target amplitude with any target bit set must vanish
    for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
        if (s.amps[i] == cxd{0.0, 0.0}) continue;
        for (int q : qubits)
            if ((i >> q) & 1) throw EngineError("QubitNotFresh: wire " + std::to_string(q) + " not in |0>");
    }
}

}  // namespace

void prepare_bell(PureState& s, int a, int b) {
    check_wire(s, a);
    check_wire(s, b);
    require_fresh(s, {a, b});
    apply_h(s, a);
    apply_cnot(s, a, b);
}

void prepare_ghz(PureState& s, const std::vector<int>& qubits) {
    if (qubits.size() < 2) throw EngineError("ghz needs >= 2 qubits");
    for (int q : qubits) check_wire(s, q);
    require_fresh(s, qubits);
    apply_h(s, qubits[0]);
    for (std::size_t i = 1; i < qubits.size(); ++i) apply_cnot(s, qubits[0], qubits[i]);
}

void prepare_w(PureState& s, const std::vector<int>& qubits) {
    const int k = static_cast<int>(qubits.size());
    if (k < 2) throw EngineError("w state needs >= 2 qubits");
    for (int q : qubits) check_wire(s, q);
    require_fresh(s, qubits);
    // rotate the W superposition into place one amplitude at a time
    const double amp = 1.0 / std::sqrt(static_cast<double>(k));
    CVec old = s.amps;
    s.amps.setZero();
    for (Eigen::Index i = 0; i < old.size(); ++i) {
        if (old[i] == cxd{0.0, 0.0}) continue;
        for (int j = 0; j < k; ++j) {
            Eigen::Index idx = i | (Eigen::Index{1} << qubits[j]);
            s.amps[idx] += old[i] * amp;
        }
    }
}

void apply_unitary(PureState& s, const CMat& u, const std::vector<int>& acting) {
    const int k = static_cast<int>(acting.size());
    const Eigen::Index dim = Eigen::Index{1} << k;
    if (u.rows() != dim || u.cols() != dim) throw EngineError("DimensionMismatch: gate vs acting set");
    for (int q : acting) check_wire(s, q);
    const int n = s.wires();

    std::vector<int> sorted = acting;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw EngineError("acting set has duplicate wires");

    CVec block(dim);
    const Eigen::Index outer = Eigen::Index{1} << (n - k);
    for (Eigen::Index outer_idx = 0; outer_idx < outer; ++outer_idx) {
        // spread outer bits across the non-acting positions
        Eigen::Index base = outer_idx;
        for (int q : sorted) base = insert_bit(base, q, 0);
        for (Eigen::Index v = 0; v < dim; ++v) {
            Eigen::Index idx = base;
            for (int b = 0; b < k; ++b)
                if ((v >> b) & 1) idx |= Eigen::Index{1} << acting[b];
            block[v] = s.amps[idx];
        }
        block = (u * block).eval();
        for (Eigen::Index v = 0; v < dim; ++v) {
            Eigen::Index idx = base;
            for (int b = 0; b < k; ++b)
                if ((v >> b) & 1) idx |= Eigen::Index{1} << acting[b];
            s.amps[idx] = block[v];
        }
    }
}

void apply_x(PureState& s, int q) {
    check_wire(s, q);
    const Eigen::Index bit = Eigen::Index{1} << q;
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if (!(i & bit)) std::swap(s.amps[i], s.amps[i | bit]);
}

void apply_y(PureState& s, int q) {
    check_wire(s, q);
    const Eigen::Index bit = Eigen::Index{1} << q;
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if (!(i & bit)) {
            cxd lo = s.amps[i], hi = s.amps[i | bit];
            s.amps[i] = cxd{0, -1} * hi;
            s.amps[i | bit] = cxd{0, 1} * lo;
        }
}

void apply_z(PureState& s, int q) {
    check_wire(s, q);
    const Eigen::Index bit = Eigen::Index{1} << q;
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if (i & bit) s.amps[i] = -s.amps[i];
}

void apply_h(PureState& s, int q) {
    check_wire(s, q);
    const Eigen::Index bit = Eigen::Index{1} << q;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if (!(i & bit)) {
            cxd lo = s.amps[i], hi = s.amps[i | bit];
            s.amps[i] = (lo + hi) * inv_sqrt2;
            s.amps[i | bit] = (lo - hi) * inv_sqrt2;
        }
}

void apply_s_gate(PureState& s, int q) {
    check_wire(s, q);
    const Eigen::Index bit = Eigen::Index{1} << q;
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if (i & bit) s.amps[i] *= cxd{0, 1};
}

void apply_t_gate(PureState& s, int q) {
    check_wire(s, q);
    const Eigen::Index bit = Eigen::Index{1} << q;
    const cxd phase = std::polar(1.0, M_PI / 4);
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if (i & bit) s.amps[i] *= phase;
}

void apply_cnot(PureState& s, int control, int target) {
    check_wire(s, control);
    check_wire(s, target);
    if (control == target) throw EngineError("cnot control equals target");
    const Eigen::Index cbit = Eigen::Index{1} << control;
    const Eigen::Index tbit = Eigen::Index{1} << target;
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if ((i & cbit) && !(i & tbit)) std::swap(s.amps[i], s.amps[i | tbit]);
}

void apply_cz(PureState& s, int a, int b) {
    check_wire(s, a);
    check_wire(s, b);
    const Eigen::Index mask = (Eigen::Index{1} << a) | (Eigen::Index{1} << b);
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if ((i & mask) == mask) s.amps[i] = -s.amps[i];
}

void apply_swap(PureState& s, int a, int b) {
    if (a == b) return;
    apply_cnot(s, a, b);
    apply_cnot(s, b, a);
    apply_cnot(s, a, b);
}

int measure_z(PureState& s, int q, RngStream& rng) {
    check_wire(s, q);
    const Eigen::Index bit = Eigen::Index{1} << q;
    double p1 = 0.0;
    for (Eigen::Index i = 0; i < s.amps.size(); ++i)
        if (i & bit) p1 += std::norm(s.amps[i]);
    const int outcome = rng.uniform() < p1 ? 1 : 0;
    const double keep_prob = outcome ? p1 : 1.0 - p1;
    const double scale = 1.0 / std::sqrt(keep_prob);
    for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
        bool one = (i & bit) != 0;
        if (one != static_cast<bool>(outcome))
            s.amps[i] = 0.0;
        else
            s.amps[i] *= scale;
    }
    return outcome;
}

int add_wire(PureState& s) {
    const int n = s.wires();
    if (n + 1 > kMaxStatevectorQubits) throw EngineError("statevector cap exceeded");
    CVec grown = CVec::Zero(s.amps.size() * 2);
    grown.head(s.amps.size()) = s.amps;
    s.amps = std::move(grown);
    return n;
}

void drop_top_wire(PureState& s) {
    const int n = s.wires();
    if (n <= 1) throw EngineError("cannot drop the last wire");
    const Eigen::Index half = s.amps.size() / 2;
    if (s.amps.tail(half).squaredNorm() > 1e-18) throw EngineError("top wire not |0>, cannot drop");
    s.amps = s.amps.head(half).eval();
}

MixedState partial_trace(const PureState& s, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    if (keep.empty()) throw EngineError("keep set empty");
    if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
        throw EngineError("keep set has duplicates");
    const int n = s.wires();
    const int k = static_cast<int>(keep.size());
    for (int q : keep) check_wire(s, q);
    if (k > kMaxDensityQubits) throw EngineError("SubsetTooLarge: density cap is 12 qubits");

    const Eigen::Index dk = Eigen::Index{1} << k;
    CMat rho = CMat::Zero(dk, dk);
    const Eigen::Index outer = Eigen::Index{1} << (n - k);
    CVec col(dk);
    for (Eigen::Index c = 0; c < outer; ++c) {
        Eigen::Index base = c;
        for (int q : keep) base = insert_bit(base, q, 0);
        for (Eigen::Index v = 0; v < dk; ++v) {
            Eigen::Index idx = base;
            for (int b = 0; b < k; ++b)
                if ((v >> b) & 1) idx |= Eigen::Index{1} << keep[b];
            col[v] = s.amps[idx];
        }
        rho.noalias() += col * col.adjoint();
    }
    return MixedState{std::move(rho), std::move(keep)};
}

MixedState partial_trace(const MixedState& m, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    if (keep.empty()) throw EngineError("keep set empty");
    // positions of keep within m.subset
    std::vector<int> pos;
    pos.reserve(keep.size());
    for (int q : keep) {
        auto it = std::find(m.subset.begin(), m.subset.end(), q);
        if (it == m.subset.end()) throw EngineError("SubsetMismatch: qubit not in state subset");
        pos.push_back(static_cast<int>(it - m.subset.begin()));
    }
    const int k = static_cast<int>(pos.size());
    const int n = static_cast<int>(m.subset.size());
    const Eigen::Index dk = Eigen::Index{1} << k;
    CMat rho = CMat::Zero(dk, dk);
    std::vector<int> sorted_pos = pos;
    std::sort(sorted_pos.begin(), sorted_pos.end());
    const Eigen::Index outer = Eigen::Index{1} << (n - k);
    for (Eigen::Index c = 0; c < outer; ++c) {
        Eigen::Index base = c;
        for (int p : sorted_pos) base = insert_bit(base, p, 0);
        for (Eigen::Index vi = 0; vi < dk; ++vi) {
            Eigen::Index row = base;
            for (int b = 0; b < k; ++b)
                if ((vi >> b) & 1) row |= Eigen::Index{1} << pos[b];
            for (Eigen::Index vj = 0; vj < dk; ++vj) {
                Eigen::Index colidx = base;
                for (int b = 0; b < k; ++b)
                    if ((vj >> b) & 1) colidx |= Eigen::Index{1} << pos[b];
                rho(vi, vj) += m.rho(row, colidx);
            }
        }
    }
    return MixedState{std::move(rho), std::move(keep)};
}

double l1_norm(const CMat& m) {
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues().sum();
}

double trace_distance(const MixedState& a, const MixedState& b) {
    if (a.subset != b.subset) throw EngineError("SubsetMismatch: states live on different subsets");
    Eigen::SelfAdjointEigenSolver<CMat> es(a.rho - b.rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double deviation_from_uniform(const MixedState& m) {
    const double d = static_cast<double>(m.rho.rows());
    Eigen::SelfAdjointEigenSolver<CMat> es(m.rho, Eigen::EigenvaluesOnly);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        sum += std::abs(es.eigenvalues()[i] - 1.0 / d);
    return sum;
}

double entropy_bits(const MixedState& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(m.rho, Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double lambda = es.eigenvalues()[i];
        if (lambda > kEigClip) h -= lambda * std::log2(lambda);
    }
    return h;
}

double subset_entropy(const PureState& s, const std::vector<int>& subset) {
    const int n = s.wires();
    const int k = static_cast<int>(subset.size());
    if (k == 0 || k == n) return 0.0;  // empty or globally pure
    std::vector<int> sorted = subset;
    std::sort(sorted.begin(), sorted.end());
    // S(A) = S(complement) for a pure global state, so use the smaller side
    if (n - k < k || k > kMaxDensityQubits) {
        if (n - k > kMaxDensityQubits) throw EngineError("SubsetTooLarge: neither side fits the density cap");
        std::vector<int> comp;
        comp.reserve(n - k);
        for (int q = 0; q < n; ++q)
            if (!std::binary_search(sorted.begin(), sorted.end(), q)) comp.push_back(q);
        return entropy_bits(partial_trace(s, comp));
    }
    return entropy_bits(partial_trace(s, sorted));
}

double mutual_information(const PureState& s, const std::vector<int>& a, const std::vector<int>& b) {
    for (int q : a)
        if (std::find(b.begin(), b.end(), q) != b.end())
            throw EngineError("OverlappingSubsets: mutual information needs disjoint sets");
    if (a.empty() || b.empty()) return 0.0;
    std::vector<int> joint = a;
    joint.insert(joint.end(), b.begin(), b.end());
    return subset_entropy(s, a) + subset_entropy(s, b) - subset_entropy(s, joint);
}

CMat haar_unitary(int k, RngStream& rng) {
    if (k < 1 || k > kMaxDensityQubits) throw EngineError("TooLarge: haar sampling cap");
    const Eigen::Index d = Eigen::Index{1} << k;
    CMat z(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal_complex() * M_SQRT1_2;
    Eigen::HouseholderQR<CMat> qr(z);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        cxd diag = r(j, j);
        cxd phase = diag == cxd{0.0, 0.0} ? cxd{1.0, 0.0} : diag / std::abs(diag);
        q.col(j) *= phase;
    }
    return q;
}

CMat state_preparation_unitary(const CVec& target) {
    const Eigen::Index d = target.size();
    if (d < 1 || (d & (d - 1)) != 0) throw EngineError("target length must be a power of two");
    const double norm = target.norm();
    if (norm < 1e-12) throw EngineError("target vector is null");
    CVec t = target / norm;
    // pivot column keeps the completion nonsingular
    Eigen::Index pivot = 0;
    t.cwiseAbs().maxCoeff(&pivot);
    CMat m = CMat::Zero(d, d);
    m.col(0) = t;
    Eigen::Index col = 1;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j == pivot) continue;
        m(j, col++) = 1.0;
    }
    Eigen::HouseholderQR<CMat> qr(m);
    CMat q = qr.householderQ();
    cxd overlap = q.col(0).adjoint() * t;
    q.col(0) *= overlap;
    return q;
}

std::vector<double> schmidt_spectrum(const PureState& s, const std::vector<int>& cut) {
    const int n = s.wires();
    if (cut.empty() || static_cast<int>(cut.size()) >= n) throw EngineError("BadCut: cut must be a proper subset");
    std::vector<int> side = cut;
    std::sort(side.begin(), side.end());
    if (static_cast<int>(side.size()) > n - static_cast<int>(side.size())) {
        std::vector<int> comp;
        for (int q = 0; q < n; ++q)
            if (!std::binary_search(side.begin(), side.end(), q)) comp.push_back(q);
        side = comp;
    }
    MixedState rho = partial_trace(s, side);
    Eigen::SelfAdjointEigenSolver<CMat> es(rho.rho, Eigen::EigenvaluesOnly);
    std::vector<double> spectrum;
    spectrum.reserve(es.eigenvalues().size());
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
        spectrum.push_back(std::max(0.0, es.eigenvalues()[i]));
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    return spectrum;
}

bool nielsen_convertible(std::vector<double> source, std::vector<double> target) {
    const std::size_t len = std::max(source.size(), target.size());
    source.resize(len, 0.0);
    target.resize(len, 0.0);
    std::sort(source.begin(), source.end(), std::greater<>());
    std::sort(target.begin(), target.end(), std::greater<>());
    double pa = 0.0, pb = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        pa += source[i];
        pb += target[i];
        if (pa > pb + 1e-12) return false;
    }
    return true;
}

double distillation_rate(const PureState& s, const std::vector<int>& cut) {
    const int n = s.wires();
    if (cut.empty() || static_cast<int>(cut.size()) >= n) throw EngineError("BadCut: cut must be a proper subset");
    return subset_entropy(s, cut);
}

double fidelity(const PureState& a, const PureState& b) {
    if (a.amps.size() != b.amps.size()) throw EngineError("DimensionMismatch: states differ in size");
    return std::norm(a.amps.dot(b.amps));
}

QubitRegister::QubitRegister(const NetworkGraph& net, int rprime_qubits, int dcenter_qubits)
    : rprime_id_(net.node_count()), dcenter_id_(net.node_count() + 1), network_qubits_(net.total_qubits()) {
    int wire = 0;
    for (NodeId n = 0; n < net.node_count(); ++n) {
        std::vector<int> slots(net.capacity(n), -1);
        for (int q = 0; q < net.qubit_budget(n); ++q) slots[q] = wire++;
        budget_[n] = net.qubit_budget(n);
        slot_wire_[n] = std::move(slots);
    }
    if (rprime_qubits > 0) {
        std::vector<int> slots(rprime_qubits);
        for (int q = 0; q < rprime_qubits; ++q) slots[q] = wire++;
        budget_[rprime_id_] = rprime_qubits;
        slot_wire_[rprime_id_] = std::move(slots);
    }
    if (dcenter_qubits > 0) {
        std::vector<int> slots(dcenter_qubits);
        for (int q = 0; q < dcenter_qubits; ++q) slots[q] = wire++;
        budget_[dcenter_id_] = dcenter_qubits;
        slot_wire_[dcenter_id_] = std::move(slots);
    }
    initial_wires_ = wire;
}

int QubitRegister::used_slots(NodeId node) const {
    const auto& slots = slot_wire_.at(node);
    return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](int w) { return w >= 0; }));
}

int QubitRegister::wire_of(NodeId node, int local) const {
    int w = slot_wire_.at(node).at(local);
    if (w < 0) throw EngineError("empty qubit slot " + std::to_string(node) + ":" + std::to_string(local));
    return w;
}

int QubitRegister::assign(NodeId node, int local, int wire) {
    int prev = slot_wire_.at(node).at(local);
    slot_wire_.at(node).at(local) = wire;
    return prev;
}

void QubitRegister::clear(NodeId node, int local) { slot_wire_.at(node).at(local) = -1; }

int QubitRegister::take_free_slot(NodeId node, int wire) {
    auto& slots = slot_wire_.at(node);
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (slots[i] < 0) {
            slots[i] = wire;
            return static_cast<int>(i);
        }
    throw SemanticError("CapacityExceeded: node " + std::to_string(node) + " has no free qubit slot");
}

int QubitRegister::slot_of(NodeId node, int wire) const {
    const auto& slots = slot_wire_.at(node);
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (slots[i] == wire) return static_cast<int>(i);
    throw EngineError("wire " + std::to_string(wire) + " is not at node " + std::to_string(node));
}

void QubitRegister::compact(NodeId node) {
    auto& slots = slot_wire_.at(node);
    std::vector<int> occupied;
    occupied.reserve(slots.size());
    for (int w : slots)
        if (w >= 0) occupied.push_back(w);
    std::fill(slots.begin(), slots.end(), -1);
    std::copy(occupied.begin(), occupied.end(), slots.begin());
}

std::vector<int> QubitRegister::protocol_wires(NodeId node) const {
    std::vector<int> out;
    const int b = budget_.at(node);
    out.reserve(b);
    for (int q = 0; q < b; ++q) out.push_back(wire_of(node, q));
    return out;
}

std::vector<int> QubitRegister::block_wires(const std::vector<NodeId>& nodes) const {
    std::vector<int> out;
    for (NodeId n : nodes) {
        auto w = protocol_wires(n);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

}  // namespace qnet
