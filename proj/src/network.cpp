#include "qnet/network.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "qnet/errors.hpp"

namespace qnet {

NetworkGraph NetworkGraph::build(std::vector<NodeSpec> nodes, std::vector<EdgeKey> edges,
                                 Endowment default_endowment, std::map<EdgeKey, Endowment> per_edge) {
    if (nodes.empty()) throw SemanticError("EmptyNetwork: at least one node required");

    std::sort(nodes.begin(), nodes.end(), [](const NodeSpec& x, const NodeSpec& y) { return x.id < y.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id != static_cast<NodeId>(i))
            throw SemanticError("node ids must be dense 0..N-1, got " + std::to_string(nodes[i].id));
        if (nodes[i].qubit_budget < 1)
            throw SemanticError("qubit_budget must be >= 1 at node " + std::to_string(nodes[i].id));
    }

    NetworkGraph g;
    const int n = static_cast<int>(nodes.size());
    for (const EdgeKey& e : edges) {
        if (e.a == e.b) throw SemanticError("SelfLoop: edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")");
        EdgeKey k = make_edge(e.a, e.b);
        if (k.a < 0 || k.b >= n)
            throw SemanticError("DanglingEdge: edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                                ") references a missing node");
        if (g.endowment_.contains(k))
            throw SemanticError("duplicate edge (" + std::to_string(k.a) + "," + std::to_string(k.b) + ")");
        auto it = per_edge.find(k);
        g.endowment_[k] = it != per_edge.end() ? it->second : default_endowment;
    }

    for (const NodeSpec& spec : nodes) g.adjacency_[spec.id] = {};
    for (const auto& [k, _] : g.endowment_) {
        g.adjacency_[k.a].push_back(k.b);
        g.adjacency_[k.b].push_back(k.a);
    }
    for (auto& [_, adj] : g.adjacency_) std::sort(adj.begin(), adj.end());

    int offset = 0;
    for (NodeSpec& spec : nodes) {
        if (!spec.capacity) {
            int max_nb = 0;
            for (NodeId nb : g.adjacency_[spec.id]) max_nb = std::max(max_nb, nodes[nb].qubit_budget);
            spec.capacity = spec.qubit_budget + max_nb;
        } else if (*spec.capacity < spec.qubit_budget) {
            throw SemanticError("capacity below qubit_budget at node " + std::to_string(spec.id));
        }
        g.offsets_[spec.id] = offset;
        offset += spec.qubit_budget;
    }
    g.total_qubits_ = offset;
    g.nodes_ = std::move(nodes);
    return g;
}

bool NetworkGraph::connected() const {
    if (nodes_.empty()) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<NodeId> queue{nodes_.front().id};
    seen[queue.front()] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (NodeId nb : adjacency_.at(cur))
            if (!seen[nb]) {
                seen[nb] = 1;
                ++reached;
                queue.push_back(nb);
            }
    }
    return reached == nodes_.size();
}

int NetworkGraph::diameter() const {
    if (!connected()) throw SemanticError("DisconnectedGraph: diameter undefined");
    int best = 0;
    const int n = node_count();
    for (NodeId src = 0; src < n; ++src) {
        std::vector<int> dist(n, -1);
        std::deque<NodeId> queue{src};
        dist[src] = 0;
        while (!queue.empty()) {
            NodeId cur = queue.front();
            queue.pop_front();
            for (NodeId nb : adjacency_.at(cur))
                if (dist[nb] < 0) {
                    dist[nb] = dist[cur] + 1;
                    queue.push_back(nb);
                }
        }
        best = std::max(best, *std::max_element(dist.begin(), dist.end()));
    }
    return best;
}

Partition Partition::make(const NetworkGraph& net, const std::map<std::string, std::set<NodeId>>& assignment,
                          const std::set<NodeId>& scope) {
    if (assignment.empty()) throw SemanticError("partition needs at least one block");
    std::set<NodeId> seen;
    for (const auto& [label, block] : assignment) {
        for (NodeId n : block) {
            if (n < 0 || n >= net.node_count())
                throw SemanticError("partition block '" + label + "' references missing node " + std::to_string(n));
            if (!seen.insert(n).second)
                throw SemanticError("OverlappingBlocks: node " + std::to_string(n) + " appears twice");
        }
    }
    for (NodeId n : scope)
        if (!seen.contains(n)) throw SemanticError("UncoveredNode: node " + std::to_string(n) + " not in any block");
    for (NodeId n : seen)
        if (!scope.contains(n))
            throw SemanticError("partition block exceeds declared scope at node " + std::to_string(n));
    return Partition{assignment};
}

int Partition::block_qubits(const NetworkGraph& net, const std::string& label) const {
    const auto& block = blocks.at(label);
    return std::accumulate(block.begin(), block.end(), 0,
                           [&](int acc, NodeId n) { return acc + net.qubit_budget(n); });
}

TopologyKind topology_kind_from_string(const std::string& s) {
    if (s == "path") return TopologyKind::Path;
    if (s == "ring") return TopologyKind::Ring;
    if (s == "grid") return TopologyKind::Grid;
    if (s == "star") return TopologyKind::Star;
    if (s == "complete") return TopologyKind::Complete;
    if (s == "random_regular") return TopologyKind::RandomRegular;
    throw ParseError("unknown topology kind '" + s + "'");
}

namespace {

std::vector<EdgeKey> random_regular_edges(int n, int deg, std::uint64_t seed) {
    if (n * deg % 2 != 0 || deg >= n)
        throw SemanticError("BadParams: no " + std::to_string(deg) + "-regular graph on " + std::to_string(n) +
                            " nodes");
    RngStream rng(seed, 0x7e9);
    // pairing model with restarts
    for (int attempt = 0; attempt < 2000; ++attempt) {
        std::vector<int> stubs;
        stubs.reserve(static_cast<std::size_t>(n) * deg);
        for (int v = 0; v < n; ++v)
            for (int k = 0; k < deg; ++k) stubs.push_back(v);
        for (int i = static_cast<int>(stubs.size()) - 1; i > 0; --i)
            std::swap(stubs[i], stubs[rng.uniform_int(0, i)]);
        std::set<EdgeKey> edges;
        bool ok = true;
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            if (stubs[i] == stubs[i + 1] || !edges.insert(make_edge(stubs[i], stubs[i + 1])).second) {
                ok = false;
                break;
            }
        }
        if (ok) return {edges.begin(), edges.end()};
    }
    throw SemanticError("BadParams: failed to sample a simple regular graph");
}

}  // namespace

NetworkGraph generate_topology(TopologyKind kind, const TopologyParams& p) {
    if (p.nodes < 1 && kind != TopologyKind::Grid) throw SemanticError("BadParams: nodes must be >= 1");
    std::vector<EdgeKey> edges;
    int n = p.nodes;
    switch (kind) {
        case TopologyKind::Path:
            for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
            break;
        case TopologyKind::Ring:
            if (n < 3) throw SemanticError("BadParams: ring needs >= 3 nodes");
            for (int i = 0; i < n; ++i) edges.push_back(make_edge(i, (i + 1) % n));
            break;
        case TopologyKind::Star:
            if (n < 2) throw SemanticError("BadParams: star needs >= 2 nodes");
            for (int i = 1; i < n; ++i) edges.push_back({0, i});
            break;
        case TopologyKind::Complete:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
            break;
        case TopologyKind::Grid: {
            if (p.rows < 1 || p.cols < 1) throw SemanticError("BadParams: grid needs rows, cols >= 1");
            n = p.rows * p.cols;
            auto at = [&](int r, int c) { return r * p.cols + c; };
            for (int r = 0; r < p.rows; ++r)
                for (int c = 0; c < p.cols; ++c) {
                    if (c + 1 < p.cols) edges.push_back({at(r, c), at(r, c + 1)});
                    if (r + 1 < p.rows) edges.push_back({at(r, c), at(r + 1, c)});
                }
            break;
        }
        case TopologyKind::RandomRegular:
            edges = random_regular_edges(n, p.degree, p.seed);
            break;
    }
    std::vector<NodeSpec> nodes;
    nodes.reserve(n);
    for (int i = 0; i < n; ++i) nodes.push_back({i, p.qubits_per_node, std::nullopt, OpClass::TypeII});
    std::sort(edges.begin(), edges.end());
    return NetworkGraph::build(std::move(nodes), std::move(edges), p.endowment);
}

}  // namespace qnet
