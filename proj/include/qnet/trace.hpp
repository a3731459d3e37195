#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qnet/dense.hpp"
#include "qnet/network.hpp"

namespace qnet {

using EventId = int;

enum class EventKind { Local, Send, Receive, ResourceCreate, ResourceConsume };
enum class ChannelKind { Classical, Quantum, None };

const char* event_kind_name(EventKind k);
const char* channel_kind_name(ChannelKind c);
EventKind event_kind_from_string(const std::string& s);
ChannelKind channel_kind_from_string(const std::string& s);

struct Event {
    EventId id = -1;  // assigned by record()
    NodeId node = 0;
    EventKind kind = EventKind::Local;
    ChannelKind channel = ChannelKind::None;
    bool post_consumption = false;
    OpClass op_class = OpClass::TypeII;
    bool noisy = false;
    long long units = 0;
    std::string unit_label;
    int wall_step = 0;
    std::vector<EventId> causes;  // explicit causes; the lane edge is added implicitly
};

struct ValidationFinding {
    std::string code;  // CycleDetected | PairingViolation | LaneOrderViolation
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;
    bool ok() const { return findings.empty(); }
};

class CausalTrace {
  public:
    // Appends the event, assigns its id, adds cause edges plus the edge from
    // the node's previous lane event. Throws SemanticError(UnknownCause) if a
    // cause id is not already present.
    EventId record(Event e);

    // Low-level edge insertion without ordering checks; validate() is the
    // arbiter of whether the resulting structure is well formed.
    void add_edge(EventId cause, EventId effect);

    const std::vector<Event>& events() const { return events_; }
    const Event& event(EventId id) const;
    const std::set<std::pair<EventId, EventId>>& edges() const { return edges_; }
    const std::vector<EventId>& lane(NodeId node) const;
    std::vector<NodeId> lane_nodes() const;
    std::size_t size() const { return events_.size(); }

    bool happened_before(EventId a, EventId b) const;  // strict: a != b
    std::set<EventId> future_cone(EventId e) const;    // includes e
    std::set<EventId> past_cone(EventId e) const;      // includes e

    // Transitive reduction. Throws SemanticError(CycleDetected) on a cyclic edge set.
    std::set<std::pair<EventId, EventId>> hasse_reduce() const;

    ValidationReport validate() const;

  private:
    void check_id(EventId id, const char* what) const;
    std::vector<std::vector<EventId>> successors() const;
    std::vector<std::vector<EventId>> predecessors() const;

    std::vector<Event> events_;
    std::set<std::pair<EventId, EventId>> edges_;
    std::map<NodeId, std::vector<EventId>> lanes_;
};

// Definition-style local event detector: fires when a node's reduced state
// moves at least epsilon in L1 norm from the snapshot taken at its last event.
class EventDetector {
  public:
    explicit EventDetector(double epsilon = 1e-6);

    // First observation of a node records the baseline and reports no event.
    bool observe(NodeId node, const MixedState& rho);
    double epsilon() const { return eps_; }

  private:
    double eps_;
    std::map<NodeId, MixedState> snapshot_;
};

}  // namespace qnet
