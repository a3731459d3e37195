#pragma once

#include <map>
#include <set>
#include <memory>
#include <string>
#include <vector>

#include "qnet/engine.hpp"
#include "qnet/ledger.hpp"
#include "qnet/network.hpp"
#include "qnet/trace.hpp"

namespace qnet {

struct ProtocolRunConfig {
    EngineKind engine = EngineKind::Dense;
    std::uint64_t seed = 0;
    int rprime_qubits = 0;
    int dcenter_qubits = 0;
    TermList initial_stocks;  // GHZ/W/extra [qq] stocks prepared before the protocol
    int max_wires = 0;        // 0: engine default
};

// One protocol execution: quantum state, qubit placement, causal trace,
// resource ledger, and a seeded rng stream. Logical qubits keep their ids as
// teleportation moves them between wires; `logical_wire` is the map.
struct ProtocolRun {
    const NetworkGraph* net = nullptr;
    EngineKind engine = EngineKind::Dense;
    std::unique_ptr<EngineState> state;
    QubitRegister reg;
    CausalTrace trace;
    Ledger ledger;
    RngStream rng;
    TermList achieved;
    std::vector<std::string> notes;
    int wall_step = 0;
    std::map<EdgeKey, long long> endowment_drawn;
    std::map<SpeciesKey, std::vector<std::vector<int>>> stock_wires;  // units awaiting use
    std::map<NodeId, std::set<int>> transient;  // resource halves held outside data slots
    std::vector<int> logical_wire;  // logical qubit -> current wire
    std::vector<int> wire_logical;  // wire -> logical qubit, -1 for ancilla

    int logical_of_slot(NodeId node, int slot) const;
    int wire_of_logical(int logical) const;
};

ProtocolRun make_run(const NetworkGraph& net, const ProtocolRunConfig& cfg);

// Entanglement distribution: creates one [qq] unit across the edge, drawing
// from the edge endowment. Returns false when a finite endowment is spent.
bool materialize_pair(ProtocolRun& run, NodeId a, NodeId b);
bool pair_available(const ProtocolRun& run, NodeId a, NodeId b);

struct TeleportResult {
    int m1 = 0, m2 = 0;
    int dst_slot = 0;
    int logical = -1;
};

TeleportResult teleport(ProtocolRun& run, NodeId src, int src_slot, NodeId dst);
int superdense_send(ProtocolRun& run, NodeId src, NodeId dst, int bits, double noise_p = 0.0);
void entanglement_swap(ProtocolRun& run, NodeId mid, NodeId left, NodeId right);
void swap_chain(ProtocolRun& run, const std::vector<NodeId>& path, bool parallel = false);
void distributed_cnot(ProtocolRun& run, NodeId control, NodeId target, int control_slot = 0,
                      int target_slot = 0);
void controlled_teleport_ghz(ProtocolRun& run, NodeId q, NodeId r, NodeId s,
                             bool r_cooperates = true);
int shared_coin(ProtocolRun& run, NodeId a, NodeId b);

struct CompileResult {
    int coin = 0;
    NodeId host = -1, guest = -1;
    std::vector<int> returned;  // selection, indices into the canonical (A,B) qubit list
};

// LOCC compilation of a neighbor unitary: coin picks the host, the guest
// teleports its qubits over, the host applies u locally, then teleports a
// uniformly random selection of qubits back. The global state in logical
// order equals u applied directly; the selection decides which node ends up
// holding which logical qubit.
CompileResult compile_neighbor_unitary(ProtocolRun& run, const LocalUnitary& u, NodeId a, NodeId b);

// Script layer for LU/LOCC rounds.
struct ScriptOp {
    enum class Kind { Local, MeasureZ, Send } kind = Kind::Local;
    NodeId node = 0;
    LocalUnitary u;          // Local
    std::vector<int> slots;  // Local: acted slots; MeasureZ: one slot
    std::string out;         // MeasureZ: name of the produced bit
    std::string bit;         // Send: bit to transmit; Local: condition bit ("" = always)
    NodeId to = -1;          // Send
    ChannelKind channel = ChannelKind::Classical;
};
using Script = std::vector<ScriptOp>;

void lu_transform(ProtocolRun& run, const std::map<NodeId, LocalUnitary>& per_node);
void lu_script(ProtocolRun& run, const Script& script);    // IllegalChannelUse on any Send
void locc_round(ProtocolRun& run, const Script& script);   // IllegalChannelUse on quantum Send

// Depolarizing trajectory: with probability p applies a uniform Pauli
// (I/X/Y/Z) to the wire, realizing rho -> (1-p) rho + p I/2 in expectation.
void apply_depolarizing(ProtocolRun& run, int wire, double p);

// Declared resource inequalities, exact-match checked against a finished run.
ResourceInequality teleport_inequality(NodeId src, NodeId dst);
ResourceInequality superdense_inequality(NodeId src, NodeId dst);
ResourceInequality swap_inequality(NodeId mid, NodeId left, NodeId right);
ResourceInequality distributed_cnot_inequality(NodeId control, NodeId target);
ResourceInequality controlled_teleport_inequality(NodeId q, NodeId r, NodeId s);

// Full state vector reordered so amplitude index bit i is logical qubit i.
// Dense engine only; ancilla wires must be back in |0>.
CVec state_in_logical_order(const ProtocolRun& run);

}  // namespace qnet
