#include "qnet/scrambling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

const char* gate_source_name(GateSourceKind k) {
    switch (k) {
        case GateSourceKind::Haar: return "haar";
        case GateSourceKind::Clifford: return "clifford";
        case GateSourceKind::TDoped: return "t_doped";
        case GateSourceKind::Identity: return "identity";
    }
    return "?";
}

const char* schedule_policy_name(SchedulePolicy p) {
    return p == SchedulePolicy::Sweep ? "sweep" : "random_edge_matching";
}

GateSourceKind gate_source_from_string(const std::string& s) {
    if (s == "haar") return GateSourceKind::Haar;
    if (s == "clifford") return GateSourceKind::Clifford;
    if (s == "t_doped") return GateSourceKind::TDoped;
    if (s == "identity") return GateSourceKind::Identity;
    throw ParseError("unknown gate source: " + s);
}

SchedulePolicy schedule_policy_from_string(const std::string& s) {
    if (s == "sweep") return SchedulePolicy::Sweep;
    if (s == "random_edge_matching") return SchedulePolicy::RandomEdgeMatching;
    throw ParseError("unknown schedule policy: " + s);
}

Schedule build_schedule(const NetworkGraph& net, int rounds, SchedulePolicy policy,
                        RngStream& rng) {
    if (rounds < 1) throw SemanticError("schedule needs at least one round");
    std::vector<EdgeKey> edges;
    for (const auto& [e, endow] : net.edges()) edges.push_back(e);
    if (edges.empty()) throw SemanticError("network has no edges to schedule");
    Schedule schedule;
    schedule.reserve(static_cast<std::size_t>(rounds));
    if (policy == SchedulePolicy::Sweep) {
        for (int r = 0; r < rounds; ++r)
            schedule.push_back({edges[static_cast<std::size_t>(r) % edges.size()]});
        return schedule;
    }
    for (int r = 0; r < rounds; ++r) {
        std::vector<EdgeKey> pool = edges;
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[static_cast<std::size_t>(
                                       rng.uniform_int(0, static_cast<int>(i) - 1))]);
        std::vector<EdgeKey> matching;
        std::set<NodeId> used;
        for (const EdgeKey& e : pool)
            if (!used.contains(e.a) && !used.contains(e.b)) {
                matching.push_back(e);
                used.insert(e.a);
                used.insert(e.b);
            }
        schedule.push_back(std::move(matching));
    }
    return schedule;
}

namespace {

GateList remap_pair_gates(const GateList& gates, int ia, int ib) {
    GateList out;
    out.reserve(gates.size());
    for (GateOp op : gates) {
        op.q0 = op.q0 == 0 ? ia : ib;
        if (is_two_qubit(op.g)) op.q1 = op.q1 == 0 ? ia : ib;
        out.push_back(op);
    }
    return out;
}

// Draws the next scheduled unitary over a block of qa + qb qubits.
LocalUnitary draw_unitary(const ScramblingSpec& spec, RngStream& rng, int qa, int qb,
                          int& t_left) {
    LocalUnitary u;
    const int block = qa + qb;
    switch (spec.gate_source) {
        case GateSourceKind::Identity:
            break;
        case GateSourceKind::Haar:
            u.matrix = haar_unitary(block, rng);
            break;
        case GateSourceKind::Clifford:
        case GateSourceKind::TDoped: {
            const int ia = rng.uniform_int(0, qa - 1);
            const int ib = qa + rng.uniform_int(0, qb - 1);
            u.gates = remap_pair_gates(random_two_qubit_clifford(rng), ia, ib);
            if (spec.gate_source == GateSourceKind::TDoped && t_left > 0) {
                u.gates.push_back({Gate::T, rng.uniform_int(0, block - 1), 0});
                --t_left;
            }
            break;
        }
    }
    return u;
}

void entangle_pairwise(ProtocolRun& run, NodeId from_node, NodeId to_node,
                       const std::vector<int>& from_wires, const std::vector<int>& to_wires,
                       const std::string& label) {
    run.wall_step++;
    for (std::size_t i = 0; i < from_wires.size(); ++i) {
        run.state->apply_gate({Gate::H, from_wires[i], 0});
        run.state->apply_gate({Gate::CNOT, from_wires[i], to_wires[i]});
    }
    Event c0;
    c0.node = from_node;
    c0.kind = EventKind::ResourceCreate;
    c0.units = static_cast<long long>(from_wires.size());
    c0.unit_label = label;
    c0.wall_step = run.wall_step;
    run.trace.record(std::move(c0));
    Event s;
    s.node = from_node;
    s.kind = EventKind::Send;
    s.channel = ChannelKind::Quantum;
    s.post_consumption = false;
    s.units = static_cast<long long>(from_wires.size());
    s.unit_label = label;
    s.wall_step = run.wall_step;
    EventId sid = run.trace.record(std::move(s));
    Event r;
    r.node = to_node;
    r.kind = EventKind::Receive;
    r.channel = ChannelKind::Quantum;
    r.post_consumption = false;
    r.units = static_cast<long long>(from_wires.size());
    r.unit_label = label;
    r.wall_step = run.wall_step;
    r.causes = {sid};
    EventId rid = run.trace.record(std::move(r));
    Event c1;
    c1.node = to_node;
    c1.kind = EventKind::ResourceCreate;
    c1.units = static_cast<long long>(from_wires.size());
    c1.unit_label = label;
    c1.wall_step = run.wall_step;
    c1.causes = {rid};
    run.trace.record(std::move(c1));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}


ScrambleOutcome run_scrambling(const ScramblingSpec& spec) {
    if (!spec.net) throw SemanticError("scrambling spec has no network");
    const NetworkGraph& net = *spec.net;
    if (spec.r_node < 0 || spec.r_node >= net.node_count())
        throw SemanticError("R node not in network");
    if (spec.r_size < 1 || spec.r_size > net.qubit_budget(spec.r_node))
        throw SemanticError("R size must fit the source node's qubit budget");

    std::vector<int> d_targets = spec.d_targets;
    if (spec.d_size > 0) {
        // default targets: lowest qubits outside R's secret block
        const int secret_lo = net.qubit_offset(spec.r_node);
        const int secret_hi = secret_lo + spec.r_size;
        if (d_targets.empty()) {
            for (int w = 0; w < net.total_qubits() && static_cast<int>(d_targets.size()) < spec.d_size;
                 ++w)
                if (w < secret_lo || w >= secret_hi) d_targets.push_back(w);
        }
        if (static_cast<int>(d_targets.size()) != spec.d_size)
            throw SemanticError("data-center target set size must equal its qubit count");
        std::set<int> seen;
        for (int w : d_targets) {
            if (w < 0 || w >= net.total_qubits())
                throw SemanticError("data-center target outside the network");
            if (w >= secret_lo && w < secret_hi)
                throw SemanticError("data-center target overlaps the secret block");
            if (!seen.insert(w).second) throw SemanticError("duplicate data-center target");
        }
    }

    const int initial = net.total_qubits() + spec.r_size + spec.d_size;
    if (spec.engine == EngineKind::Dense && initial > kMaxStatevectorQubits)
        throw SemanticError("dense scrambling limited to " +
                            std::to_string(kMaxStatevectorQubits) + " qubits");

    ProtocolRunConfig cfg;
    cfg.engine = spec.engine;
    cfg.seed = spec.seed;
    cfg.rprime_qubits = spec.r_size;
    cfg.dcenter_qubits = spec.d_size;
    ScrambleOutcome outcome{
        .run = make_run(net, cfg),
        .schedule = spec.schedule,
        .r_logicals = {},
        .r_prime_wires = {},
        .d_wires = {},
        .d_target_logicals = d_targets,
        .schedule_connected = true,
        .cone_covered = false,
        .warnings = {},
    };
    ProtocolRun& run = outcome.run;

    if (outcome.schedule.empty()) {
        RngStream sched_rng = run.rng.split(0x5ced01eULL);
        outcome.schedule = build_schedule(net, spec.rounds, spec.policy, sched_rng);
    }
    for (const auto& round : outcome.schedule)
        for (const EdgeKey& e : round)
            if (!net.has_edge(e.a, e.b))
                throw SemanticError("scheduled edge not in network: " + std::to_string(e.a) + "-" +
                                    std::to_string(e.b));

    // reference entangled with the secret block
    outcome.r_prime_wires = run.reg.protocol_wires(run.reg.rprime_id());
    std::vector<int> r_wires = run.reg.protocol_wires(spec.r_node);
    r_wires.resize(static_cast<std::size_t>(spec.r_size));
    outcome.r_logicals = r_wires;
    entangle_pairwise(run, run.reg.rprime_id(), spec.r_node, outcome.r_prime_wires, r_wires,
                      "reference_pair");

    // data center purifies its target qubits
    if (spec.d_size > 0) {
        outcome.d_wires = run.reg.protocol_wires(run.reg.dcenter_id());
        std::vector<NodeId> owner(static_cast<std::size_t>(net.total_qubits()));
        for (NodeId node = 0; node < net.node_count(); ++node)
            for (int k = 0; k < net.qubit_budget(node); ++k)
                owner[static_cast<std::size_t>(net.qubit_offset(node) + k)] = node;
        std::map<NodeId, std::pair<std::vector<int>, std::vector<int>>> grouped;
        for (std::size_t j = 0; j < d_targets.size(); ++j) {
            NodeId node = owner.at(static_cast<std::size_t>(d_targets[j]));
            grouped[node].first.push_back(outcome.d_wires[j]);
            grouped[node].second.push_back(d_targets[j]);
        }
        for (const auto& [node, wires] : grouped)
            entangle_pairwise(run, run.reg.dcenter_id(), node, wires.first, wires.second,
                              "datacenter_pair");
    }

    int t_left = spec.t_budget;
    for (const auto& round : outcome.schedule) {
        for (const EdgeKey& e : round) {
            const int qa = run.reg.used_slots(e.a);
            const int qb = run.reg.used_slots(e.b);
            LocalUnitary u = draw_unitary(spec, run.rng, qa, qb, t_left);
            compile_neighbor_unitary(run, u, e.a, e.b);
        }
    }

    // connectivity of the schedule's edge union, from R
    std::set<NodeId> reached{spec.r_node};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& round : outcome.schedule)
            for (const EdgeKey& e : round) {
                if (reached.contains(e.a) && !reached.contains(e.b)) {
                    reached.insert(e.b);
                    grew = true;
                }
                if (reached.contains(e.b) && !reached.contains(e.a)) {
                    reached.insert(e.a);
                    grew = true;
                }
            }
    }
    outcome.schedule_connected = true;
    for (NodeId node = 0; node < net.node_count(); ++node)
        if (!reached.contains(node)) outcome.schedule_connected = false;
    if (!outcome.schedule_connected)
        outcome.warnings.push_back("ScheduleDisconnected: scrambling cannot reach every node");

    // future-cone coverage of R's first event
    const auto& r_lane = run.trace.lane(spec.r_node);
    if (!r_lane.empty()) {
        std::set<NodeId> cone_nodes;
        for (EventId id : run.trace.future_cone(r_lane.front()))
            cone_nodes.insert(run.trace.event(id).node);
        outcome.cone_covered = true;
        for (NodeId node = 0; node < net.node_count(); ++node)
            if (!cone_nodes.contains(node)) outcome.cone_covered = false;
    }
    return outcome;
}

std::vector<int> current_wires(const ProtocolRun& run, const std::vector<int>& logicals) {
    std::vector<int> out;
    out.reserve(logicals.size());
    for (int l : logicals) out.push_back(run.logical_wire.at(static_cast<std::size_t>(l)));
    return out;
}

std::vector<int> custody_wires(const ScrambleOutcome& outcome) {
    std::vector<int> out;
    for (NodeId node = 0; node < outcome.run.net->node_count(); ++node)
        for (int s = 0; s < outcome.run.reg.slots(node); ++s)
            if (outcome.run.reg.slot_occupied(node, s))
                out.push_back(outcome.run.reg.wire_of(node, s));
    // teleportation leaves slot->wire assignments unordered; callers treat
    // the custody list as a sorted set
    std::sort(out.begin(), out.end());
    return out;
}

double decoupling_bound(int n_e, int n_b) {
    if (n_e < 0 || n_b < 0) throw SemanticError("subset sizes must be nonnegative");
    if (n_e == 0) return 0.0;
    const double d_e = std::exp2(n_e);
    const double d_b = std::exp2(n_b);
    return std::sqrt((d_e * d_e - 1.0) / (d_e * d_b + 1.0));
}

double decoupling_deviation(const EngineState& state, const std::vector<int>& v_e) {
    return state.deviation_from_uniform(v_e);
}

namespace {

struct Accum {
    double sum = 0, sumsq = 0;
    int n = 0;
    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    double mean() const { return n ? sum / n : 0; }
    double stderr_() const {
        if (n < 2) return 0;
        const double m = mean();
        double var = (sumsq - n * m * m) / (n - 1);
        if (var < 0) var = 0;
        return std::sqrt(var / n);
    }
};

std::vector<int> random_subset(RngStream& rng, const std::vector<int>& pool, int k) {
    std::vector<int> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    for (int i = 0; i < k; ++i) {
        int j = rng.uniform_int(i, static_cast<int>(idx.size()) - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out.push_back(pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

DecouplingRow sample_decoupling(const ScramblingSpec& spec, int v_e_qubits, int trials) {
    if (trials < 1) throw SemanticError("need at least one trial");
    const int n = spec.net->total_qubits();
    if (v_e_qubits < 0 || v_e_qubits > n) throw SemanticError("SubsetTooLarge: V_E exceeds network");
    DecouplingRow row;
    row.n_e = v_e_qubits;
    row.n_b = n - v_e_qubits;
    row.bound = decoupling_bound(row.n_e, row.n_b);
    row.trials = trials;
    Accum dev, mi;
    for (int t = 0; t < trials; ++t) {
        ScramblingSpec s = spec;
        s.seed = derive_seed(spec.seed, (static_cast<std::uint64_t>(v_e_qubits) << 32) |
                                            static_cast<std::uint64_t>(t));
        ScrambleOutcome outcome = run_scrambling(s);
        std::vector<int> pool = custody_wires(outcome);
        std::vector<int> v_e = random_subset(outcome.run.rng, pool, v_e_qubits);
        dev.add(decoupling_deviation(*outcome.run.state, v_e));
        mi.add(outcome.run.state->mutual_information_bits(outcome.r_prime_wires, v_e));
    }
    row.mean_deviation = dev.mean();
    row.stderr_deviation = dev.stderr_();
    row.mean_mi = mi.mean();
    row.stderr_mi = mi.stderr_();
    return row;
}

double conservation_check(const EngineState& state, const std::vector<int>& r_prime,
                          const std::vector<int>& d_system, const std::vector<int>& rest,
                          int r_size) {
    const double i_rest = state.mutual_information_bits(r_prime, rest);
    const double i_d = d_system.empty() ? 0.0 : state.mutual_information_bits(r_prime, d_system);
    return std::abs(2.0 * r_size - i_rest - i_d);
}

DecouplingRow sample_decoupling_nodes(const ScramblingSpec& spec, int v_e_nodes, int trials) {
    if (trials < 1) throw SemanticError("need at least one trial");
    const NetworkGraph& net = *spec.net;
    if (v_e_nodes < 1 || v_e_nodes > net.node_count())
        throw SemanticError("SubsetTooLarge: V_E node count exceeds network");
    DecouplingRow row;
    row.n_e = v_e_nodes;
    row.trials = trials;
    Accum dev, mi;
    int qubit_count = 0;
    for (int t = 0; t < trials; ++t) {
        ScramblingSpec s = spec;
        s.seed = derive_seed(spec.seed ^ 0x7476ULL, (static_cast<std::uint64_t>(v_e_nodes) << 32) |
                                                        static_cast<std::uint64_t>(t));
        ScrambleOutcome outcome = run_scrambling(s);
        std::vector<int> node_idx(static_cast<std::size_t>(net.node_count()));
        for (std::size_t i = 0; i < node_idx.size(); ++i) node_idx[i] = static_cast<int>(i);
        std::vector<int> chosen = random_subset(outcome.run.rng, node_idx, v_e_nodes);
        std::vector<int> v_e;
        for (int i : chosen) {
            const NodeId node = static_cast<NodeId>(i);
            for (int slot = 0; slot < outcome.run.reg.slots(node); ++slot)
                if (outcome.run.reg.slot_occupied(node, slot))
                    v_e.push_back(outcome.run.reg.wire_of(node, slot));
        }
        std::sort(v_e.begin(), v_e.end());
        qubit_count = static_cast<int>(v_e.size());
        dev.add(decoupling_deviation(*outcome.run.state, v_e));
        mi.add(outcome.run.state->mutual_information_bits(outcome.r_prime_wires, v_e));
    }
    row.n_b = net.total_qubits() - qubit_count;
    row.mean_deviation = dev.mean();
    row.stderr_deviation = dev.stderr_();
    row.bound = decoupling_bound(qubit_count, row.n_b);
    row.mean_mi = mi.mean();
    row.stderr_mi = mi.stderr_();
    return row;
}

DecouplingReport threshold_sweep(const ScramblingSpec& spec, int trials) {
    DecouplingReport report;
    for (int size = 1; size <= spec.net->node_count(); ++size)
        report.push_back(sample_decoupling_nodes(spec, size, trials));
    return report;
}

std::string query_cost_estimate(int n, int t_count) {
    std::ostringstream os;
    if (t_count <= 0) {
        os << "poly(" << n << ")";
    } else {
        os << "poly(" << n << ")·exp(" << t_count << ")";
    }
    return os.str();
}

}  // namespace qnet
