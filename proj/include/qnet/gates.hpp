#pragma once

#include <string>
#include <vector>

namespace qnet {

enum class Gate { H, S, X, Y, Z, CNOT, CZ, SWAP, T };

// q1 is ignored for single-qubit gates
struct GateOp {
    Gate g;
    int q0 = 0;
    int q1 = 0;
};

using GateList = std::vector<GateOp>;

inline bool is_two_qubit(Gate g) { return g == Gate::CNOT || g == Gate::CZ || g == Gate::SWAP; }
inline bool is_clifford(Gate g) { return g != Gate::T; }

inline bool all_clifford(const GateList& gates) {
    for (const GateOp& op : gates)
        if (!is_clifford(op.g)) return false;
    return true;
}

std::string gate_name(Gate g);

}  // namespace qnet
