#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qnet/rng.hpp"

namespace qnet {

using NodeId = int;

enum class OpClass { TypeI, TypeII };

struct NodeSpec {
    NodeId id = 0;
    int qubit_budget = 1;
    // Physical qubit slots. When unset, defaults to
    // qubit_budget + max over neighbors' qubit_budget.
    std::optional<int> capacity;
    OpClass op_class = OpClass::TypeII;
};

struct EdgeKey {
    NodeId a, b;  // normalized a < b
    auto operator<=>(const EdgeKey&) const = default;
};

inline EdgeKey make_edge(NodeId x, NodeId y) { return x < y ? EdgeKey{x, y} : EdgeKey{y, x}; }

// Per-edge EPR supply: nullopt means the G_phi_infinity regime where
// entanglement is free.
using Endowment = std::optional<long long>;

// Immutable after build. |V| below always means total qubits, not node count.
class NetworkGraph {
  public:
    NetworkGraph() = default;  // empty placeholder; real graphs come from build
    static NetworkGraph build(std::vector<NodeSpec> nodes, std::vector<EdgeKey> edges,
                              Endowment default_endowment,
                              std::map<EdgeKey, Endowment> per_edge = {});

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int total_qubits() const { return total_qubits_; }

    int qubit_budget(NodeId n) const { return nodes_.at(n).qubit_budget; }
    int capacity(NodeId n) const { return *nodes_.at(n).capacity; }
    OpClass op_class(NodeId n) const { return nodes_.at(n).op_class; }

    const std::vector<NodeId>& neighbors(NodeId n) const { return adjacency_.at(n); }
    bool has_edge(NodeId x, NodeId y) const { return endowment_.contains(make_edge(x, y)); }
    const std::map<EdgeKey, Endowment>& edges() const { return endowment_; }
    Endowment endowment(NodeId x, NodeId y) const { return endowment_.at(make_edge(x, y)); }

    // first global qubit index of node n under the canonical ordering
    // (node id ascending, local index ascending, little-endian)
    int qubit_offset(NodeId n) const { return offsets_.at(n); }

    int diameter() const;
    bool connected() const;

  private:
    std::vector<NodeSpec> nodes_;
    std::map<EdgeKey, Endowment> endowment_;
    std::map<NodeId, std::vector<NodeId>> adjacency_;
    std::map<NodeId, int> offsets_;
    int total_qubits_ = 0;
};

// Named blocks over a declared node scope. Blocks are pairwise disjoint and
// cover the scope exactly.
struct Partition {
    std::map<std::string, std::set<NodeId>> blocks;

    static Partition make(const NetworkGraph& net,
                          const std::map<std::string, std::set<NodeId>>& assignment,
                          const std::set<NodeId>& scope);

    int block_qubits(const NetworkGraph& net, const std::string& label) const;
};

enum class TopologyKind { Path, Ring, Grid, Star, Complete, RandomRegular };

struct TopologyParams {
    int nodes = 0;
    int qubits_per_node = 1;
    int degree = 0;   // random_regular
    int rows = 0;     // grid
    int cols = 0;     // grid
    std::uint64_t seed = 0;
    Endowment endowment;  // nullopt = infinite
};

NetworkGraph generate_topology(TopologyKind kind, const TopologyParams& params);

TopologyKind topology_kind_from_string(const std::string& s);

}  // namespace qnet
