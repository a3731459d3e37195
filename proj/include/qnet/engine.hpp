#pragma once

#include <memory>
#include <vector>

#include "qnet/dense.hpp"
#include "qnet/gates.hpp"
#include "qnet/rng.hpp"
#include "qnet/stabilizer.hpp"

namespace qnet {

enum class EngineKind { Dense, Stabilizer };

const char* engine_kind_name(EngineKind k);

// A local operation: either a gate word (engine-agnostic when Clifford) or a
// raw unitary matrix (dense engine only). Empty both ways means identity.
// Gate wire fields are relative to the wire list passed at application time.
struct LocalUnitary {
    GateList gates;
    CMat matrix;

    bool uses_matrix() const { return matrix.rows() > 0; }
    bool is_identity() const { return gates.empty() && !uses_matrix(); }
    bool clifford() const { return !uses_matrix() && all_clifford(gates); }
};

// Wire-pool simulation state shared by the protocol and scrambling layers.
// Wires freed by measurement are reset to |0> and recycled before new ones
// are allocated, keeping the dense statevector small.
class EngineState {
  public:
    static std::unique_ptr<EngineState> make(EngineKind kind, int initial_wires, int max_wires);
    virtual ~EngineState() = default;

    virtual EngineKind kind() const = 0;
    virtual int wire_count() const = 0;  // physical wires, including pooled free ones

    virtual int alloc_wire() = 0;          // returns a |0> wire
    virtual void release_wire(int w) = 0;  // wire must hold |0>

    virtual void apply_gate(const GateOp& op) = 0;  // q0/q1 are wire ids
    void apply_gates(const GateList& ops) {
        for (const GateOp& op : ops) apply_gate(op);
    }
    // wires[i] hosts the operation's qubit i
    virtual void apply_local(const LocalUnitary& u, const std::vector<int>& wires) = 0;

    virtual int measure_z(int wire, RngStream& rng) = 0;

    virtual double subset_entropy_bits(const std::vector<int>& wires) const = 0;
    virtual double mutual_information_bits(const std::vector<int>& a,
                                           const std::vector<int>& b) const = 0;
    virtual double deviation_from_uniform(const std::vector<int>& wires) const = 0;
    virtual MixedState reduced(const std::vector<int>& wires) const = 0;

    virtual const PureState* dense_state() const { return nullptr; }
    virtual const StabilizerTableau* tableau() const { return nullptr; }
};

}  // namespace qnet
