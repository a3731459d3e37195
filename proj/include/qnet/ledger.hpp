#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "qnet/network.hpp"
#include "qnet/trace.hpp"

namespace qnet {

// Species identity: stock labels ([qq], [cc], GHZ, W, ...) carry an unordered
// party set (stored sorted); channel-use labels ([c->c], [q->q]) carry an
// ordered (from, to) pair.
struct SpeciesKey {
    std::string label;
    std::vector<NodeId> parties;
    bool directed = false;

    bool operator<(const SpeciesKey& o) const {
        if (label != o.label) return label < o.label;
        if (parties != o.parties) return parties < o.parties;
        return directed < o.directed;
    }
    bool operator==(const SpeciesKey& o) const {
        return label == o.label && parties == o.parties && directed == o.directed;
    }
};

SpeciesKey stock_key(std::string label, std::vector<NodeId> parties);
SpeciesKey channel_key(std::string label, NodeId from, NodeId to);
std::string species_to_string(const SpeciesKey& key);

struct ResourceCount {
    SpeciesKey key;
    long long amount = 1;
};
using TermList = std::vector<ResourceCount>;

struct LedgerDelta {
    EventId event;
    SpeciesKey key;
    long long amount;  // positive credit, negative debit
};

class Ledger {
  public:
    // Infinite species never raise InsufficientBalance: a shortfall is drawn
    // implicitly as a credit linked to the same event, keeping balances >= 0.
    void mark_infinite(const SpeciesKey& key) { infinite_.insert(key); }
    bool is_infinite(const SpeciesKey& key) const { return infinite_.contains(key); }

    void credit(const SpeciesKey& key, long long amount, EventId event);
    void debit(const SpeciesKey& key, long long amount, EventId event);

    long long balance(const SpeciesKey& key) const;
    const std::map<SpeciesKey, long long>& balances() const { return balances_; }
    const std::vector<LedgerDelta>& history() const { return history_; }

    std::map<SpeciesKey, long long> consumed_totals() const;  // |debits| per species
    std::map<SpeciesKey, long long> credited_totals() const;

    // Paper-style balance rendering: "((count,label,parties),...)", zero
    // balances omitted, deterministic key order.
    std::string species_report() const;

    // Conservation: replaying history reproduces the balances.
    bool replay_consistent() const;

  private:
    std::map<SpeciesKey, long long> balances_;
    std::set<SpeciesKey> infinite_;
    std::vector<LedgerDelta> history_;
};

struct ResourceInequality {
    TermList consumed;  // left side
    TermList produced;  // right side
};

struct InequalityCheck {
    bool pass = false;
    std::vector<std::string> mismatches;
    std::map<SpeciesKey, long long> actual_consumed;
    std::map<SpeciesKey, long long> actual_produced;
};

// Channel uses metered from the trace: units of post-consumption sends,
// grouped by channel kind and (sender, receiver).
std::map<SpeciesKey, long long> channel_uses(const CausalTrace& trace);

// Consumed side = ledger debits plus trace channel uses; produced side = the
// run's achieved-effect list. Both must match the inequality exactly.
InequalityCheck check_inequality(const CausalTrace& trace, const Ledger& ledger,
                                 const TermList& achieved, const ResourceInequality& ineq);

}  // namespace qnet
