#include "qnet/trace.hpp"

#include <algorithm>
#include <deque>

#include "qnet/errors.hpp"

namespace qnet {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Local: return "local";
        case EventKind::Send: return "send";
        case EventKind::Receive: return "receive";
        case EventKind::ResourceCreate: return "resource_create";
        case EventKind::ResourceConsume: return "resource_consume";
    }
    return "?";
}

const char* channel_kind_name(ChannelKind c) {
    switch (c) {
        case ChannelKind::Classical: return "classical";
        case ChannelKind::Quantum: return "quantum";
        case ChannelKind::None: return "none";
    }
    return "?";
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "local") return EventKind::Local;
    if (s == "send") return EventKind::Send;
    if (s == "receive") return EventKind::Receive;
    if (s == "resource_create") return EventKind::ResourceCreate;
    if (s == "resource_consume") return EventKind::ResourceConsume;
    throw ParseError("unknown event kind: " + s);
}

ChannelKind channel_kind_from_string(const std::string& s) {
    if (s == "classical") return ChannelKind::Classical;
    if (s == "quantum") return ChannelKind::Quantum;
    if (s == "none") return ChannelKind::None;
    throw ParseError("unknown channel kind: " + s);
}

EventId CausalTrace::record(Event e) {
    const EventId id = static_cast<EventId>(events_.size());
    for (EventId c : e.causes)
        if (c < 0 || c >= id) throw SemanticError("UnknownCause: event " + std::to_string(c));
    e.id = id;
    auto& lane = lanes_[e.node];
    if (!lane.empty()) edges_.insert({lane.back(), id});
    for (EventId c : e.causes) edges_.insert({c, id});
    lane.push_back(id);
    events_.push_back(std::move(e));
    return id;
}

void CausalTrace::add_edge(EventId cause, EventId effect) {
    check_id(cause, "edge cause");
    check_id(effect, "edge effect");
    if (cause == effect) throw SemanticError("self edge");
    edges_.insert({cause, effect});
}

const Event& CausalTrace::event(EventId id) const {
    check_id(id, "event");
    return events_[static_cast<std::size_t>(id)];
}

const std::vector<EventId>& CausalTrace::lane(NodeId node) const {
    static const std::vector<EventId> empty;
    auto it = lanes_.find(node);
    return it == lanes_.end() ? empty : it->second;
}

std::vector<NodeId> CausalTrace::lane_nodes() const {
    std::vector<NodeId> out;
    out.reserve(lanes_.size());
    for (const auto& [node, _] : lanes_) out.push_back(node);
    return out;
}

void CausalTrace::check_id(EventId id, const char* what) const {
    if (id < 0 || static_cast<std::size_t>(id) >= events_.size())
        throw SemanticError(std::string("UnknownEvent: ") + what + " " + std::to_string(id));
}

std::vector<std::vector<EventId>> CausalTrace::successors() const {
    std::vector<std::vector<EventId>> adj(events_.size());
    for (const auto& [a, b] : edges_) adj[static_cast<std::size_t>(a)].push_back(b);
    return adj;
}

std::vector<std::vector<EventId>> CausalTrace::predecessors() const {
    std::vector<std::vector<EventId>> adj(events_.size());
    for (const auto& [a, b] : edges_) adj[static_cast<std::size_t>(b)].push_back(a);
    return adj;
}

bool CausalTrace::happened_before(EventId a, EventId b) const {
    check_id(a, "happened_before");
    check_id(b, "happened_before");
    if (a == b) return false;
    auto adj = successors();
    std::vector<char> seen(events_.size(), 0);
    std::deque<EventId> queue{a};
    seen[static_cast<std::size_t>(a)] = 1;
    while (!queue.empty()) {
        EventId u = queue.front();
        queue.pop_front();
        for (EventId v : adj[static_cast<std::size_t>(u)]) {
            if (v == b) return true;
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    return false;
}

namespace {

std::set<EventId> cone(const std::vector<std::vector<EventId>>& adj, EventId e) {
    std::set<EventId> out{e};
    std::deque<EventId> queue{e};
    while (!queue.empty()) {
        EventId u = queue.front();
        queue.pop_front();
        for (EventId v : adj[static_cast<std::size_t>(u)])
            if (out.insert(v).second) queue.push_back(v);
    }
    return out;
}

}  // namespace

std::set<EventId> CausalTrace::future_cone(EventId e) const {
    check_id(e, "future_cone");
    return cone(successors(), e);
}

std::set<EventId> CausalTrace::past_cone(EventId e) const {
    check_id(e, "past_cone");
    return cone(predecessors(), e);
}

std::set<std::pair<EventId, EventId>> CausalTrace::hasse_reduce() const {
    const std::size_t n = events_.size();
    auto adj = successors();
    // Kahn topological order; failure means a cycle.
    std::vector<int> indeg(n, 0);
    for (const auto& [a, b] : edges_) indeg[static_cast<std::size_t>(b)]++;
    std::deque<EventId> queue;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(static_cast<EventId>(i));
    std::vector<EventId> topo;
    topo.reserve(n);
    while (!queue.empty()) {
        EventId u = queue.front();
        queue.pop_front();
        topo.push_back(u);
        for (EventId v : adj[static_cast<std::size_t>(u)])
            if (--indeg[static_cast<std::size_t>(v)] == 0) queue.push_back(v);
    }
    if (topo.size() != n) throw SemanticError("CycleDetected: trace is not a DAG");

    // reach[u] = strict descendants of u, as a bitset
    const std::size_t wn = (n + 63) / 64;
    std::vector<std::uint64_t> reach(n * wn, 0);
    auto bit_set = [&](std::vector<std::uint64_t>& v, std::size_t base, std::size_t j) {
        v[base + (j >> 6)] |= std::uint64_t{1} << (j & 63);
    };
    auto bit_get = [&](const std::vector<std::uint64_t>& v, std::size_t base, std::size_t j) {
        return (v[base + (j >> 6)] >> (j & 63)) & 1;
    };
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const std::size_t u = static_cast<std::size_t>(*it);
        for (EventId vi : adj[u]) {
            const std::size_t v = static_cast<std::size_t>(vi);
            bit_set(reach, u * wn, v);
            for (std::size_t w = 0; w < wn; ++w) reach[u * wn + w] |= reach[v * wn + w];
        }
    }
    std::set<std::pair<EventId, EventId>> reduced;
    for (const auto& [a, b] : edges_) {
        bool redundant = false;
        for (EventId wi : adj[static_cast<std::size_t>(a)]) {
            if (wi == b) continue;
            if (bit_get(reach, static_cast<std::size_t>(wi) * wn, static_cast<std::size_t>(b))) {
                redundant = true;
                break;
            }
        }
        if (!redundant) reduced.insert({a, b});
    }
    return reduced;
}

ValidationReport CausalTrace::validate() const {
    ValidationReport report;
    const std::size_t n = events_.size();

    // acyclicity
    {
        std::vector<int> indeg(n, 0);
        auto adj = successors();
        for (const auto& [a, b] : edges_) indeg[static_cast<std::size_t>(b)]++;
        std::deque<EventId> queue;
        for (std::size_t i = 0; i < n; ++i)
            if (indeg[i] == 0) queue.push_back(static_cast<EventId>(i));
        std::size_t visited = 0;
        while (!queue.empty()) {
            EventId u = queue.front();
            queue.pop_front();
            ++visited;
            for (EventId v : adj[static_cast<std::size_t>(u)])
                if (--indeg[static_cast<std::size_t>(v)] == 0) queue.push_back(v);
        }
        if (visited != n)
            report.findings.push_back({"CycleDetected", "edge set contains a directed cycle"});
    }

    // send/receive pairing
    std::map<EventId, int> receive_count;  // per send
    for (const Event& e : events_) {
        if (e.kind != EventKind::Receive) continue;
        std::vector<EventId> sends;
        for (EventId c : e.causes)
            if (events_[static_cast<std::size_t>(c)].kind == EventKind::Send) sends.push_back(c);
        if (sends.size() != 1) {
            report.findings.push_back(
                {"PairingViolation", "receive " + std::to_string(e.id) + " references " +
                                         std::to_string(sends.size()) + " sends"});
            continue;
        }
        const Event& s = events_[static_cast<std::size_t>(sends[0])];
        receive_count[s.id]++;
        if (s.channel != e.channel)
            report.findings.push_back({"PairingViolation", "receive " + std::to_string(e.id) +
                                                               " channel differs from send " +
                                                               std::to_string(s.id)});
        if (s.id >= e.id)
            report.findings.push_back({"PairingViolation", "send " + std::to_string(s.id) +
                                                               " does not precede receive " +
                                                               std::to_string(e.id)});
    }
    for (const auto& [sid, cnt] : receive_count)
        if (cnt > 1)
            report.findings.push_back({"PairingViolation", "send " + std::to_string(sid) +
                                                               " matched by " + std::to_string(cnt) +
                                                               " receives"});

    // lane monotonicity: consecutive lane events are edge-connected and move
    // forward in id and logical time
    for (const auto& [node, lane] : lanes_) {
        for (std::size_t i = 0; i + 1 < lane.size(); ++i) {
            EventId a = lane[i], b = lane[i + 1];
            if (a >= b)
                report.findings.push_back({"LaneOrderViolation", "node " + std::to_string(node) +
                                                                     " lane ids not increasing"});
            if (!edges_.contains({a, b}))
                report.findings.push_back(
                    {"LaneOrderViolation", "node " + std::to_string(node) + " lane events " +
                                               std::to_string(a) + "," + std::to_string(b) +
                                               " not edge-connected"});
            if (events_[static_cast<std::size_t>(a)].wall_step >
                events_[static_cast<std::size_t>(b)].wall_step)
                report.findings.push_back({"LaneOrderViolation",
                                           "node " + std::to_string(node) + " wall_step decreases at " +
                                               std::to_string(b)});
        }
    }
    return report;
}

EventDetector::EventDetector(double epsilon) : eps_(epsilon) {
    if (!(epsilon > 0)) throw SemanticError("detector epsilon must be positive");
}

bool EventDetector::observe(NodeId node, const MixedState& rho) {
    auto it = snapshot_.find(node);
    if (it == snapshot_.end()) {
        snapshot_.emplace(node, rho);
        return false;
    }
    if (it->second.subset != rho.subset)
        throw SemanticError("SubsetMismatch: detector snapshot covers different qubits");
    const double dist = trace_distance(it->second, rho);
    if (dist >= eps_) {
        it->second = rho;
        return true;
    }
    return false;
}

}  // namespace qnet
