#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qnet/network.hpp"
#include "qnet/rng.hpp"

namespace qnet {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr int kMaxStatevectorQubits = 24;
inline constexpr int kMaxDensityQubits = 12;

// Global pure state over wires, little-endian: wire 0 is the least
// significant amplitude-index bit.
struct PureState {
    CVec amps;

    int wires() const {
        int n = 0;
        while ((Eigen::Index{1} << n) < amps.size()) ++n;
        return n;
    }
};

// Reduced density operator over an ascending set of wire indices.
struct MixedState {
    CMat rho;
    std::vector<int> subset;
};

struct QubitInit {
    enum Kind { Zero, One, Plus, Custom } kind = Zero;
    cxd a0 = 1.0, a1 = 0.0;  // Custom amplitudes
};

PureState init_product_state(const std::vector<QubitInit>& per_qubit);

// Targets must currently be fresh |0> wires.
void prepare_bell(PureState& s, int a, int b);
void prepare_ghz(PureState& s, const std::vector<int>& qubits);
void prepare_w(PureState& s, const std::vector<int>& qubits);

// u is 2^k x 2^k over acting (acting[0] = least significant gate bit).
void apply_unitary(PureState& s, const CMat& u, const std::vector<int>& acting);

void apply_x(PureState& s, int q);
void apply_y(PureState& s, int q);
void apply_z(PureState& s, int q);
void apply_h(PureState& s, int q);
void apply_s_gate(PureState& s, int q);
void apply_t_gate(PureState& s, int q);
void apply_cnot(PureState& s, int control, int target);
void apply_cz(PureState& s, int a, int b);
void apply_swap(PureState& s, int a, int b);

int measure_z(PureState& s, int q, RngStream& rng);

// Wire pool maintenance. add_wire appends a |0> wire at the top and returns
// its index; drop_top_wire removes the top wire, which must hold |0>.
int add_wire(PureState& s);
void drop_top_wire(PureState& s);

MixedState partial_trace(const PureState& s, std::vector<int> keep);
MixedState partial_trace(const MixedState& m, std::vector<int> keep);

double l1_norm(const CMat& m);
double trace_distance(const MixedState& a, const MixedState& b);

// || rho - I/d ||_1
double deviation_from_uniform(const MixedState& m);

double entropy_bits(const MixedState& m);

// Entropy of a wire subset of a globally pure state. Uses the complement
// when that side is smaller, so subsets up to n - kMaxDensityQubits work.
double subset_entropy(const PureState& s, const std::vector<int>& subset);

double mutual_information(const PureState& s, const std::vector<int>& a, const std::vector<int>& b);

CMat haar_unitary(int k, RngStream& rng);

// Unitary whose first column is the (normalized) target vector, so
// U|0...0> prepares it.
CMat state_preparation_unitary(const CVec& target);

std::vector<double> schmidt_spectrum(const PureState& s, const std::vector<int>& cut);
bool nielsen_convertible(std::vector<double> source, std::vector<double> target);
double distillation_rate(const PureState& s, const std::vector<int>& cut);

double fidelity(const PureState& a, const PureState& b);

// Maps logical qubits (node, local slot) to statevector wires. Network nodes
// occupy ids 0..N-1; the reference R' and the data center D sit on reserved
// ids N and N+1. Slots beyond a node's qubit_budget (up to capacity) hold
// transient qubits. Teleports remap slots to new wires.
class QubitRegister {
  public:
    QubitRegister(const NetworkGraph& net, int rprime_qubits, int dcenter_qubits);

    NodeId rprime_id() const { return rprime_id_; }
    NodeId dcenter_id() const { return dcenter_id_; }

    int network_qubits() const { return network_qubits_; }
    int initial_wires() const { return initial_wires_; }

    int slots(NodeId node) const { return static_cast<int>(slot_wire_.at(node).size()); }
    int used_slots(NodeId node) const;

    int wire_of(NodeId node, int local) const;
    bool slot_occupied(NodeId node, int local) const { return slot_wire_.at(node)[local] >= 0; }

    // -1 when the slot is empty
    int assign(NodeId node, int local, int wire);
    void clear(NodeId node, int local);
    int take_free_slot(NodeId node, int wire);  // first empty slot; SemanticError when full
    int slot_of(NodeId node, int wire) const;   // slot currently holding the wire
    void compact(NodeId node);                  // shift occupied wires to the lowest slots

    // wires of a node's first qubit_budget slots
    std::vector<int> protocol_wires(NodeId node) const;
    // wires of node list, canonical order
    std::vector<int> block_wires(const std::vector<NodeId>& nodes) const;

  private:
    std::map<NodeId, std::vector<int>> slot_wire_;
    std::map<NodeId, int> budget_;
    NodeId rprime_id_;
    NodeId dcenter_id_;
    int network_qubits_;
    int initial_wires_;
};

}  // namespace qnet
