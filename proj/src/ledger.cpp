#include "qnet/ledger.hpp"

#include <algorithm>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

SpeciesKey stock_key(std::string label, std::vector<NodeId> parties) {
    SpeciesKey key{std::move(label), std::move(parties), false};
    std::sort(key.parties.begin(), key.parties.end());
    if (std::adjacent_find(key.parties.begin(), key.parties.end()) != key.parties.end())
        throw SemanticError("duplicate party in species " + key.label);
    if ((key.label == "[qq]" || key.label == "[cc]") && key.parties.size() != 2)
        throw SemanticError(key.label + " needs exactly two parties");
    if (key.label != "[qq]" && key.label != "[cc]" && key.parties.size() < 3)
        throw SemanticError("multiparty species " + key.label + " needs at least three parties");
    return key;
}

SpeciesKey channel_key(std::string label, NodeId from, NodeId to) {
    if (label != "[c->c]" && label != "[q->q]") throw SemanticError("unknown channel label " + label);
    if (from == to) throw SemanticError("channel endpoints must differ");
    return SpeciesKey{std::move(label), {from, to}, true};
}

std::string species_to_string(const SpeciesKey& key) {
    std::ostringstream os;
    os << key.label;
    if (key.directed) {
        os << " P" << key.parties[0] << "->P" << key.parties[1];
    } else {
        os << " ";
        for (NodeId p : key.parties) os << "P" << p;
    }
    return os.str();
}

void Ledger::credit(const SpeciesKey& key, long long amount, EventId event) {
    if (amount < 1) throw SemanticError("credit amount must be >= 1");
    balances_[key] += amount;
    history_.push_back({event, key, amount});
}

void Ledger::debit(const SpeciesKey& key, long long amount, EventId event) {
    if (amount < 1) throw SemanticError("debit amount must be >= 1");
    long long& bal = balances_[key];
    if (bal < amount) {
        if (!is_infinite(key))
            throw SemanticError("InsufficientBalance: " + species_to_string(key) + " has " +
                                std::to_string(bal) + ", needs " + std::to_string(amount));
        long long draw = amount - bal;
        bal += draw;
        history_.push_back({event, key, draw});
    }
    bal -= amount;
    history_.push_back({event, key, -amount});
}

long long Ledger::balance(const SpeciesKey& key) const {
    auto it = balances_.find(key);
    return it == balances_.end() ? 0 : it->second;
}

std::map<SpeciesKey, long long> Ledger::consumed_totals() const {
    std::map<SpeciesKey, long long> out;
    for (const LedgerDelta& d : history_)
        if (d.amount < 0) out[d.key] += -d.amount;
    return out;
}

std::map<SpeciesKey, long long> Ledger::credited_totals() const {
    std::map<SpeciesKey, long long> out;
    for (const LedgerDelta& d : history_)
        if (d.amount > 0) out[d.key] += d.amount;
    return out;
}

std::string Ledger::species_report() const {
    std::ostringstream os;
    os << "(";
    bool first = true;
    for (const auto& [key, bal] : balances_) {
        if (bal == 0) continue;
        if (!first) os << ",";
        first = false;
        os << "(" << bal << "," << key.label << ",";
        if (key.directed) {
            os << "P" << key.parties[0] << "->P" << key.parties[1];
        } else {
            for (NodeId p : key.parties) os << "P" << p;
        }
        os << ")";
    }
    os << ")";
    return os.str();
}

bool Ledger::replay_consistent() const {
    std::map<SpeciesKey, long long> replay;
    for (const LedgerDelta& d : history_) {
        replay[d.key] += d.amount;
        if (replay[d.key] < 0) return false;
    }
    for (const auto& [key, bal] : balances_)
        if (bal != replay[key]) return false;
    for (const auto& [key, bal] : replay)
        if (bal != balance(key)) return false;
    return true;
}

std::map<SpeciesKey, long long> channel_uses(const CausalTrace& trace) {
    std::map<SpeciesKey, long long> out;
    for (const Event& e : trace.events()) {
        if (e.kind != EventKind::Receive) continue;
        const Event* send = nullptr;
        for (EventId c : e.causes) {
            const Event& cause = trace.event(c);
            if (cause.kind == EventKind::Send) {
                send = &cause;
                break;
            }
        }
        if (!send || !send->post_consumption) continue;
        const char* label = send->channel == ChannelKind::Classical ? "[c->c]" : "[q->q]";
        out[channel_key(label, send->node, e.node)] += send->units;
    }
    return out;
}

namespace {

std::map<SpeciesKey, long long> aggregate(const TermList& terms) {
    std::map<SpeciesKey, long long> out;
    for (const ResourceCount& t : terms) out[t.key] += t.amount;
    return out;
}

void compare(const std::map<SpeciesKey, long long>& want, const std::map<SpeciesKey, long long>& got,
             const char* side, std::vector<std::string>& mismatches) {
    for (const auto& [key, amount] : want) {
        auto it = got.find(key);
        long long actual = it == got.end() ? 0 : it->second;
        if (actual != amount)
            mismatches.push_back(std::string(side) + " " + species_to_string(key) + ": expected " +
                                 std::to_string(amount) + ", got " + std::to_string(actual));
    }
    for (const auto& [key, amount] : got) {
        if (amount != 0 && !want.contains(key))
            mismatches.push_back(std::string(side) + " " + species_to_string(key) + ": unexpected " +
                                 std::to_string(amount));
    }
}

}  // namespace

InequalityCheck check_inequality(const CausalTrace& trace, const Ledger& ledger,
                                 const TermList& achieved, const ResourceInequality& ineq) {
    InequalityCheck report;
    report.actual_consumed = ledger.consumed_totals();
    for (const auto& [key, units] : channel_uses(trace)) report.actual_consumed[key] += units;
    report.actual_produced = aggregate(achieved);
    compare(aggregate(ineq.consumed), report.actual_consumed, "consumed", report.mismatches);
    compare(aggregate(ineq.produced), report.actual_produced, "produced", report.mismatches);
    report.pass = report.mismatches.empty();
    return report;
}

}  // namespace qnet
