#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnet/engine.hpp"
#include "qnet/network.hpp"
#include "qnet/scrambling.hpp"

namespace qnet {

enum class EngineChoice { Dense, Stabilizer, Auto };

EngineChoice engine_choice_from_string(const std::string& s);
const char* engine_choice_name(EngineChoice c);

enum class ProtocolKind {
    Teleport,
    Superdense,
    EntanglementSwap,
    DistributedCnot,
    ControlledTeleport,
    SharedCoin,
};

ProtocolKind protocol_kind_from_string(const std::string& s);
const char* protocol_kind_name(ProtocolKind k);

struct ProtocolSection {
    ProtocolKind kind = ProtocolKind::Teleport;
    NodeId from = 0, to = 1;   // teleport, superdense, shared coin
    int message = -1;          // superdense: 0..3, -1 runs all four
    double noise = 0.0;        // superdense channel depolarizing probability
    std::vector<NodeId> path;  // entanglement swap chain, ends inclusive
    bool parallel = false;
    NodeId control = 0, target = 1;                   // distributed CNOT
    NodeId source = 0, controller = 1, receiver = 2;  // controlled teleport
    bool cooperate = true;
};

struct ScramblingSection {
    NodeId r_node = 0;
    int r_size = 1;
    int d_size = 0;
    std::vector<int> d_targets;  // global qubit indices; empty = lowest outside R
    int rounds = 1;
    GateSourceKind gate_source = GateSourceKind::Haar;
    int t_budget = 0;
    SchedulePolicy policy = SchedulePolicy::Sweep;
    Schedule schedule;          // explicit round list; empty = built from policy
    std::optional<int> trials;  // overrides the scenario trial count
    std::vector<int> subsets;   // V_E sizes given decoupling rows in run reports
    bool node_subsets = false;  // sample V_E per node instead of per qubit
};

// Pass/fail gates evaluated by `run`; any failure exits with code 2.
struct CheckSettings {
    double min_fidelity = 1.0 - 1e-9;
    bool inequality = true;
    bool require_connected = true;
    std::optional<bool> bound;  // default: on for haar and clifford sources
    double bound_sigmas = 3.0;
    double max_conservation_residual = 1e-9;
};

struct Scenario {
    std::string name = "scenario";
    EngineChoice engine = EngineChoice::Auto;
    std::uint64_t seed = 1;
    int trials = 1;
    double epsilon = 1e-6;
    std::string out_dir;  // overridden by --out, then the environment default
    NetworkGraph network;
    std::optional<ProtocolSection> protocol;
    std::optional<ScramblingSection> scrambling;
    CheckSettings checks;
    std::string source_text;  // raw document, echoed into reports
};

// Parses and fully validates one scenario document. ParseError carries the
// line/column for malformed JSON; semantic findings are collected and thrown
// together as one SemanticError.
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

// auto picks the stabilizer engine iff every gate is Clifford and the wire
// count exceeds the dense limit; protocol scenarios always run dense.
EngineKind resolve_engine(const Scenario& sc);

// Total wires the run will hold (network + R' + D).
int scenario_wire_count(const Scenario& sc);

}  // namespace qnet
