#include "qnet/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qnet/errors.hpp"

namespace qnet {

const char* engine_kind_name(EngineKind k) {
    return k == EngineKind::Dense ? "dense" : "stabilizer";
}

namespace {

class DenseEngineState final : public EngineState {
  public:
    DenseEngineState(int initial_wires, int max_wires) : max_wires_(max_wires) {
        if (max_wires_ > kMaxStatevectorQubits)
            throw EngineError("statevector limit is " + std::to_string(kMaxStatevectorQubits) +
                              " wires");
        if (initial_wires < 1 || initial_wires > max_wires_)
            throw EngineError("bad initial wire count");
        state_ = init_product_state(std::vector<QubitInit>(static_cast<std::size_t>(initial_wires)));
    }

    EngineKind kind() const override { return EngineKind::Dense; }
    int wire_count() const override { return state_.wires(); }

    int alloc_wire() override {
        if (!free_.empty()) {
            int w = *free_.begin();
            free_.erase(free_.begin());
            return w;
        }
        if (state_.wires() >= max_wires_) throw EngineError("wire pool exhausted");
        add_wire(state_);
        return state_.wires() - 1;
    }

    void release_wire(int w) override {
        check_wire(w);
        if (free_.contains(w)) throw EngineError("double release of wire " + std::to_string(w));
        double p1 = 0;
        const std::size_t bit = std::size_t{1} << w;
        for (std::size_t i = 0; i < state_.amps.size(); ++i)
            if (i & bit) p1 += std::norm(state_.amps[static_cast<Eigen::Index>(i)]);
        if (p1 > 1e-9) throw EngineError("released wire " + std::to_string(w) + " is not |0>");
        if (p1 > 0) {
            for (std::size_t i = 0; i < state_.amps.size(); ++i)
                if (i & bit) state_.amps[static_cast<Eigen::Index>(i)] = 0.0;
            state_.amps.normalize();
        }
        free_.insert(w);
        // shrink the vector while its top wire is pooled
        while (!free_.empty() && *free_.rbegin() == state_.wires() - 1) {
            free_.erase(std::prev(free_.end()));
            drop_top_wire(state_);
        }
    }

    void apply_gate(const GateOp& op) override {
        check_wire(op.q0);
        if (is_two_qubit(op.g)) check_wire(op.q1);
        apply_gate_dense(op);
    }

    void apply_local(const LocalUnitary& u, const std::vector<int>& wires) override {
        for (int w : wires) check_wire(w);
        if (u.is_identity()) return;
        if (u.uses_matrix()) {
            if (u.matrix.rows() != (Eigen::Index{1} << wires.size()))
                throw EngineError("unitary dimension does not match wire count");
            apply_unitary(state_, u.matrix, wires);
            return;
        }
        for (const GateOp& op : u.gates) {
            GateOp mapped = op;
            remap(mapped.q0, wires);
            if (is_two_qubit(op.g)) remap(mapped.q1, wires);
            apply_gate_dense(mapped);
        }
    }

    int measure_z(int wire, RngStream& rng) override {
        check_wire(wire);
        return qnet::measure_z(state_, wire, rng);
    }

    double subset_entropy_bits(const std::vector<int>& wires) const override {
        return subset_entropy(state_, wires);
    }

    double mutual_information_bits(const std::vector<int>& a,
                                   const std::vector<int>& b) const override {
        return mutual_information(state_, a, b);
    }

    double deviation_from_uniform(const std::vector<int>& wires) const override {
        return qnet::deviation_from_uniform(partial_trace(state_, wires));
    }

    MixedState reduced(const std::vector<int>& wires) const override {
        return partial_trace(state_, wires);
    }

    const PureState* dense_state() const override { return &state_; }

  private:
    void check_wire(int w) const {
        if (w < 0 || w >= state_.wires())
            throw EngineError("BadIndex: wire " + std::to_string(w));
        if (free_.contains(w)) throw EngineError("wire " + std::to_string(w) + " is pooled");
    }

    static void remap(int& q, const std::vector<int>& wires) {
        if (q < 0 || static_cast<std::size_t>(q) >= wires.size())
            throw EngineError("gate wire outside the local span");
        q = wires[static_cast<std::size_t>(q)];
    }

    void apply_gate_dense(const GateOp& op) {
        switch (op.g) {
            case Gate::H: apply_h(state_, op.q0); break;
            case Gate::S: apply_s_gate(state_, op.q0); break;
            case Gate::X: apply_x(state_, op.q0); break;
            case Gate::Y: apply_y(state_, op.q0); break;
            case Gate::Z: apply_z(state_, op.q0); break;
            case Gate::T: apply_t_gate(state_, op.q0); break;
            case Gate::CNOT: apply_cnot(state_, op.q0, op.q1); break;
            case Gate::CZ: apply_cz(state_, op.q0, op.q1); break;
            case Gate::SWAP: apply_swap(state_, op.q0, op.q1); break;
        }
    }

    PureState state_;
    std::set<int> free_;
    int max_wires_;
};

class StabEngineState final : public EngineState {
  public:
    StabEngineState(int initial_wires, int max_wires) : tab_(initial_wires, max_wires) {}

    EngineKind kind() const override { return EngineKind::Stabilizer; }
    int wire_count() const override { return tab_.qubits(); }

    int alloc_wire() override {
        if (!free_.empty()) {
            int w = *free_.begin();
            free_.erase(free_.begin());
            return w;
        }
        return tab_.add_qubit();
    }

    void release_wire(int w) override {
        check_wire(w);
        if (free_.contains(w)) throw EngineError("double release of wire " + std::to_string(w));
        if (!tab_.measurement_deterministic(w))
            throw EngineError("released wire " + std::to_string(w) + " is entangled");
        RngStream unused(0);
        if (tab_.measure_z(w, unused) != 0)
            throw EngineError("released wire " + std::to_string(w) + " is not |0>");
        free_.insert(w);
    }

    void apply_gate(const GateOp& op) override {
        check_wire(op.q0);
        if (is_two_qubit(op.g)) check_wire(op.q1);
        tab_.apply(op);
    }

    void apply_local(const LocalUnitary& u, const std::vector<int>& wires) override {
        for (int w : wires) check_wire(w);
        if (u.is_identity()) return;
        if (u.uses_matrix())
            throw EngineError("stabilizer engine cannot apply raw matrices; use Clifford gates");
        for (const GateOp& op : u.gates) {
            GateOp mapped = op;
            remap(mapped.q0, wires);
            if (is_two_qubit(op.g)) remap(mapped.q1, wires);
            tab_.apply(mapped);
        }
    }

    int measure_z(int wire, RngStream& rng) override {
        check_wire(wire);
        return tab_.measure_z(wire, rng);
    }

    double subset_entropy_bits(const std::vector<int>& wires) const override {
        return static_cast<double>(tab_.subset_entropy(wires));
    }

    double mutual_information_bits(const std::vector<int>& a,
                                   const std::vector<int>& b) const override {
        return static_cast<double>(tab_.mutual_information(a, b));
    }

    double deviation_from_uniform(const std::vector<int>& wires) const override {
        return tab_.deviation_from_uniform(wires);
    }

    MixedState reduced(const std::vector<int>&) const override {
        throw EngineError("stabilizer engine has no density-matrix view");
    }

    const StabilizerTableau* tableau() const override { return &tab_; }

  private:
    void check_wire(int w) const {
        if (w < 0 || w >= tab_.qubits()) throw EngineError("BadIndex: wire " + std::to_string(w));
        if (free_.contains(w)) throw EngineError("wire " + std::to_string(w) + " is pooled");
    }

    static void remap(int& q, const std::vector<int>& wires) {
        if (q < 0 || static_cast<std::size_t>(q) >= wires.size())
            throw EngineError("gate wire outside the local span");
        q = wires[static_cast<std::size_t>(q)];
    }

    StabilizerTableau tab_;
    std::set<int> free_;
};

}  // namespace

std::unique_ptr<EngineState> EngineState::make(EngineKind kind, int initial_wires, int max_wires) {
    if (kind == EngineKind::Dense)
        return std::make_unique<DenseEngineState>(initial_wires, max_wires);
    return std::make_unique<StabEngineState>(initial_wires, max_wires);
}

}  // namespace qnet
