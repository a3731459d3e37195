#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnet/network.hpp"
#include "qnet/protocol.hpp"

namespace qnet {

// Where the scheduled two-node unitaries come from. Identity is a test hook.
enum class GateSourceKind { Haar, Clifford, TDoped, Identity };
enum class SchedulePolicy { Sweep, RandomEdgeMatching };

const char* gate_source_name(GateSourceKind k);
const char* schedule_policy_name(SchedulePolicy p);
GateSourceKind gate_source_from_string(const std::string& s);
SchedulePolicy schedule_policy_from_string(const std::string& s);

// One matching of disjoint edges per round.
using Schedule = std::vector<std::vector<EdgeKey>>;

struct ScramblingSpec {
    const NetworkGraph* net = nullptr;
    NodeId r_node = 0;          // source of the secret
    int r_size = 1;             // qubits of the secret (first slots of r_node)
    int d_size = 0;             // data-center qubits; 0 disables the data center
    std::vector<int> d_targets; // qubits the data center purifies; default: first d_size outside R
    int rounds = 1;
    GateSourceKind gate_source = GateSourceKind::Haar;
    int t_budget = 0;           // TDoped only: total T gates to insert
    SchedulePolicy policy = SchedulePolicy::Sweep;
    Schedule schedule;          // explicit schedule; empty: built from policy
    std::uint64_t seed = 1;
    EngineKind engine = EngineKind::Dense;
};

Schedule build_schedule(const NetworkGraph& net, int rounds, SchedulePolicy policy,
                        RngStream& rng);

struct ScrambleOutcome {
    ProtocolRun run;
    Schedule schedule;
    std::vector<int> r_logicals;        // secret qubits, tracked through teleports
    std::vector<int> r_prime_wires;     // reference wires, never acted on
    std::vector<int> d_wires;           // data-center wires, never acted on
    std::vector<int> d_target_logicals; // qubits the data center purifies
    bool schedule_connected = true;     // schedule's edge union reaches every node from R
    bool cone_covered = false;          // future cone of R's first event spans the network
    std::vector<std::string> warnings;
};

ScrambleOutcome run_scrambling(const ScramblingSpec& spec);

// Current wires of a set of tracked qubits.
std::vector<int> current_wires(const ProtocolRun& run, const std::vector<int>& logicals);
// All wires sitting in network-node slots (excludes reference and data center).
std::vector<int> custody_wires(const ScrambleOutcome& outcome);

// sqrt((d_E^2 - 1) / (d_E * d_B + 1)), d = 2^qubits
double decoupling_bound(int n_e, int n_b);
// ||rho_{V_E} - I/d||_1 for the given wires
double decoupling_deviation(const EngineState& state, const std::vector<int>& v_e);

struct DecouplingRow {
    int n_e = 0;  // sampled subset size (qubits; nodes for node-granularity sweeps)
    int n_b = 0;
    double mean_deviation = 0;
    double stderr_deviation = 0;
    double bound = 0;
    double mean_mi = 0;  // I(R' : V_E) in bits
    double stderr_mi = 0;
    int trials = 0;
};
using DecouplingReport = std::vector<DecouplingRow>;

// Mean deviation and I(R':V_E) over fresh scrambles, V_E resampled per trial
// as a uniform qubit subset of the scrambled custody.
DecouplingRow sample_decoupling(const ScramblingSpec& spec, int v_e_qubits, int trials);

// |2|R| - I(R':rest) - I(R':d_system)|; rest and d_system partition the
// complement of R', so the residual vanishes for pure global states.
double conservation_check(const EngineState& state, const std::vector<int>& r_prime,
                          const std::vector<int>& d_system, const std::vector<int>& rest,
                          int r_size);

// Same sampling with V_E drawn as a random node subset; n_e reports the size
// in nodes, bound uses the sampled qubit counts.
DecouplingRow sample_decoupling_nodes(const ScramblingSpec& spec, int v_e_nodes, int trials);

// I(R':V_E) profile over random node subsets of every size 1..|V|.
DecouplingReport threshold_sweep(const ScramblingSpec& spec, int trials);

// Query-complexity class of learning the scrambling circuit.
std::string query_cost_estimate(int n, int t_count);

// Stateless seed folding used for per-trial streams (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace qnet
