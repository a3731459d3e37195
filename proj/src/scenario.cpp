#include "qnet/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

using nlohmann::json;

std::string strip_exception_tag(const std::string& what) {
    // nlohmann prefixes "[json.exception.parse_error.101] "; the rest already
    // carries "parse error at line L, column C".
    auto pos = what.find("] ");
    return pos == std::string::npos ? what : what.substr(pos + 2);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ParseError("unknown key '" + it.key() + "' in " + where);
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + " is missing required key '" + key + "'");
    return *it;
}

const json* maybe(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

std::string path_str(const std::string& where, const char* key) { return where + "." + key; }

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer())
        throw ParseError("field '" + path + "' must be an integer");
    return j.get<int>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ParseError("field '" + path + "' must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError("field '" + path + "' must be a number");
    return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ParseError("field '" + path + "' must be a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError("field '" + path + "' must be a string");
    return j.get<std::string>();
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError("field '" + path + "' must be an array of integers");
    std::vector<int> out;
    for (const json& v : j) out.push_back(as_int(v, path + "[]"));
    return out;
}

Endowment as_endowment(const json& j, const std::string& path) {
    if (j.is_string()) {
        if (j.get<std::string>() == "infinite") return std::nullopt;
        throw ParseError("field '" + path + "' must be \"infinite\" or a nonnegative integer");
    }
    if (j.is_number_integer() && j.get<long long>() >= 0) return j.get<long long>();
    throw ParseError("field '" + path + "' must be \"infinite\" or a nonnegative integer");
}

OpClass as_op_class(const json& j, const std::string& path) {
    std::string s = as_string(j, path);
    if (s == "type1") return OpClass::TypeI;
    if (s == "type2") return OpClass::TypeII;
    throw ParseError("field '" + path + "' must be \"type1\" or \"type2\"");
}

struct ParsedNetwork {
    NetworkGraph graph;
    // raw inputs kept for the capacity-rule diagnostics
    std::vector<NodeSpec> nodes;
    std::vector<EdgeKey> edges;
    std::vector<bool> capacity_explicit;
};

ParsedNetwork parse_network(const json& net, std::vector<std::string>& findings) {
    if (!net.is_object()) throw ParseError("'network' must be an object");
    check_keys(net, "network", {"topology", "nodes", "edges", "endowment"});

    ParsedNetwork out;
    if (const json* topo = maybe(net, "topology")) {
        if (maybe(net, "nodes") || maybe(net, "edges"))
            throw ParseError("network takes either a topology block or nodes/edges, not both");
        check_keys(*topo, "network.topology",
                   {"kind", "nodes", "qubits_per_node", "degree", "rows", "cols", "seed",
                    "endowment"});
        TopologyParams params;
        params.nodes = as_int(require(*topo, "nodes", "network.topology"), "network.topology.nodes");
        if (const json* q = maybe(*topo, "qubits_per_node"))
            params.qubits_per_node = as_int(*q, "network.topology.qubits_per_node");
        if (const json* d = maybe(*topo, "degree")) params.degree = as_int(*d, "network.topology.degree");
        if (const json* r = maybe(*topo, "rows")) params.rows = as_int(*r, "network.topology.rows");
        if (const json* c = maybe(*topo, "cols")) params.cols = as_int(*c, "network.topology.cols");
        if (const json* s = maybe(*topo, "seed")) params.seed = as_u64(*s, "network.topology.seed");
        if (const json* e = maybe(*topo, "endowment"))
            params.endowment = as_endowment(*e, "network.topology.endowment");
        TopologyKind kind = topology_kind_from_string(
            as_string(require(*topo, "kind", "network.topology"), "network.topology.kind"));
        out.graph = generate_topology(kind, params);
        for (int n = 0; n < out.graph.node_count(); ++n) {
            out.nodes.push_back({n, out.graph.qubit_budget(n), out.graph.capacity(n),
                                 out.graph.op_class(n)});
            out.capacity_explicit.push_back(false);
        }
        for (const auto& [e, _] : out.graph.edges()) out.edges.push_back(e);
        return out;
    }

    const json& nodes = require(net, "nodes", "network");
    if (!nodes.is_array()) throw ParseError("'network.nodes' must be an array");
    for (const json& jn : nodes) {
        if (!jn.is_object()) throw ParseError("network node entries must be objects");
        check_keys(jn, "network.nodes[]", {"id", "qubits", "capacity", "op_class"});
        NodeSpec spec;
        spec.id = as_int(require(jn, "id", "network node"), "network.nodes[].id");
        spec.qubit_budget = as_int(require(jn, "qubits", "network node"), "network.nodes[].qubits");
        bool explicit_cap = false;
        if (const json* c = maybe(jn, "capacity")) {
            spec.capacity = as_int(*c, "network.nodes[].capacity");
            explicit_cap = true;
        }
        if (const json* oc = maybe(jn, "op_class")) spec.op_class = as_op_class(*oc, "network.nodes[].op_class");
        out.nodes.push_back(spec);
        out.capacity_explicit.push_back(explicit_cap);
    }

    Endowment default_endow;  // infinite unless stated
    if (const json* e = maybe(net, "endowment")) default_endow = as_endowment(*e, "network.endowment");

    std::map<EdgeKey, Endowment> per_edge;
    const json& edges = require(net, "edges", "network");
    if (!edges.is_array()) throw ParseError("'network.edges' must be an array");
    for (const json& je : edges) {
        if (!je.is_object()) throw ParseError("network edge entries must be objects");
        check_keys(je, "network.edges[]", {"a", "b", "endowment"});
        EdgeKey e = make_edge(as_int(require(je, "a", "network edge"), "network.edges[].a"),
                              as_int(require(je, "b", "network edge"), "network.edges[].b"));
        out.edges.push_back(e);
        if (const json* je2 = maybe(je, "endowment"))
            per_edge[e] = as_endowment(*je2, "network.edges[].endowment");
    }

    // Capacity rule: explicit overrides must still leave room for the largest
    // neighbor's block, i.e. capacity >= |P_i| + max over neighbors |P_j|.
    std::map<NodeId, int> budget;
    for (const NodeSpec& s : out.nodes) budget[s.id] = s.qubit_budget;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        if (!out.capacity_explicit[i] || !out.nodes[i].capacity) continue;
        int max_nb = 0;
        for (const EdgeKey& e : out.edges) {
            NodeId other = -1;
            if (e.a == out.nodes[i].id) other = e.b;
            if (e.b == out.nodes[i].id) other = e.a;
            if (other >= 0 && budget.contains(other)) max_nb = std::max(max_nb, budget[other]);
        }
        int needed = out.nodes[i].qubit_budget + max_nb;
        if (*out.nodes[i].capacity < needed)
            findings.push_back("node " + std::to_string(out.nodes[i].id) + ": capacity " +
                               std::to_string(*out.nodes[i].capacity) +
                               " violates the capacity rule (hosting a neighbor block needs at "
                               "least |P_i| + max over neighbors |P_j| = " +
                               std::to_string(needed) + ")");
    }

    out.graph = NetworkGraph::build(out.nodes, out.edges, default_endow, per_edge);
    return out;
}

ProtocolSection parse_protocol(const json& j, std::vector<std::string>& findings) {
    if (!j.is_object()) throw ParseError("'protocol' must be an object");
    ProtocolSection p;
    p.kind = protocol_kind_from_string(as_string(require(j, "kind", "protocol"), "protocol.kind"));
    switch (p.kind) {
        case ProtocolKind::Teleport:
        case ProtocolKind::SharedCoin:
            check_keys(j, "protocol", {"kind", "from", "to"});
            p.from = as_int(require(j, "from", "protocol"), "protocol.from");
            p.to = as_int(require(j, "to", "protocol"), "protocol.to");
            break;
        case ProtocolKind::Superdense:
            check_keys(j, "protocol", {"kind", "from", "to", "message", "noise"});
            p.from = as_int(require(j, "from", "protocol"), "protocol.from");
            p.to = as_int(require(j, "to", "protocol"), "protocol.to");
            if (const json* m = maybe(j, "message")) p.message = as_int(*m, "protocol.message");
            if (const json* n = maybe(j, "noise")) p.noise = as_double(*n, "protocol.noise");
            if (p.message < -1 || p.message > 3)
                findings.push_back("protocol.message must be 0..3 or -1 for all four");
            if (p.noise < 0.0 || p.noise > 1.0)
                findings.push_back("protocol.noise must lie in [0,1]");
            break;
        case ProtocolKind::EntanglementSwap:
            check_keys(j, "protocol", {"kind", "path", "parallel"});
            p.path = as_int_list(require(j, "path", "protocol"), "protocol.path");
            if (const json* par = maybe(j, "parallel")) p.parallel = as_bool(*par, "protocol.parallel");
            break;
        case ProtocolKind::DistributedCnot:
            check_keys(j, "protocol", {"kind", "control", "target"});
            p.control = as_int(require(j, "control", "protocol"), "protocol.control");
            p.target = as_int(require(j, "target", "protocol"), "protocol.target");
            break;
        case ProtocolKind::ControlledTeleport:
            check_keys(j, "protocol", {"kind", "source", "controller", "receiver", "cooperate"});
            p.source = as_int(require(j, "source", "protocol"), "protocol.source");
            p.controller = as_int(require(j, "controller", "protocol"), "protocol.controller");
            p.receiver = as_int(require(j, "receiver", "protocol"), "protocol.receiver");
            if (const json* c = maybe(j, "cooperate")) p.cooperate = as_bool(*c, "protocol.cooperate");
            break;
    }
    return p;
}

ScramblingSection parse_scrambling(const json& j) {
    if (!j.is_object()) throw ParseError("'scrambling' must be an object");
    check_keys(j, "scrambling",
               {"R", "R_size", "D_size", "D_targets", "rounds", "gate_source", "schedule_policy",
                "schedule", "t_budget", "trials", "subsets", "node_subsets"});
    ScramblingSection s;
    if (const json* r = maybe(j, "R")) s.r_node = as_int(*r, "scrambling.R");
    if (const json* rs = maybe(j, "R_size")) s.r_size = as_int(*rs, "scrambling.R_size");
    if (const json* ds = maybe(j, "D_size")) s.d_size = as_int(*ds, "scrambling.D_size");
    if (const json* dt = maybe(j, "D_targets")) s.d_targets = as_int_list(*dt, "scrambling.D_targets");
    if (const json* g = maybe(j, "gate_source"))
        s.gate_source = gate_source_from_string(as_string(*g, "scrambling.gate_source"));
    if (const json* sp = maybe(j, "schedule_policy"))
        s.policy = schedule_policy_from_string(as_string(*sp, "scrambling.schedule_policy"));
    if (const json* tb = maybe(j, "t_budget")) s.t_budget = as_int(*tb, "scrambling.t_budget");
    if (const json* t = maybe(j, "trials")) s.trials = as_int(*t, "scrambling.trials");
    if (const json* su = maybe(j, "subsets")) s.subsets = as_int_list(*su, "scrambling.subsets");
    if (const json* ns = maybe(j, "node_subsets")) s.node_subsets = as_bool(*ns, "scrambling.node_subsets");
    if (const json* sch = maybe(j, "schedule")) {
        if (!sch->is_array()) throw ParseError("'scrambling.schedule' must be an array of rounds");
        for (const json& round : *sch) {
            if (!round.is_array()) throw ParseError("schedule rounds must be arrays of edges");
            std::vector<EdgeKey> edges;
            for (const json& e : round) {
                std::vector<int> pair = as_int_list(e, "scrambling.schedule[][]");
                if (pair.size() != 2) throw ParseError("schedule edges must be [a, b] pairs");
                edges.push_back(make_edge(pair[0], pair[1]));
            }
            s.schedule.push_back(std::move(edges));
        }
    }
    const json* rounds = maybe(j, "rounds");
    if (rounds) s.rounds = as_int(*rounds, "scrambling.rounds");
    if (!s.schedule.empty()) {
        if (rounds && s.rounds != static_cast<int>(s.schedule.size()))
            throw ParseError("scrambling.rounds disagrees with the explicit schedule length");
        s.rounds = static_cast<int>(s.schedule.size());
    } else if (!rounds) {
        throw ParseError("scrambling needs 'rounds' (or an explicit 'schedule')");
    }
    return s;
}

CheckSettings parse_checks(const json& j) {
    if (!j.is_object()) throw ParseError("'checks' must be an object");
    check_keys(j, "checks",
               {"min_fidelity", "inequality", "require_connected", "bound", "bound_sigmas",
                "max_conservation_residual"});
    CheckSettings c;
    if (const json* f = maybe(j, "min_fidelity")) c.min_fidelity = as_double(*f, "checks.min_fidelity");
    if (const json* i = maybe(j, "inequality")) c.inequality = as_bool(*i, "checks.inequality");
    if (const json* r = maybe(j, "require_connected"))
        c.require_connected = as_bool(*r, "checks.require_connected");
    if (const json* b = maybe(j, "bound")) c.bound = as_bool(*b, "checks.bound");
    if (const json* s = maybe(j, "bound_sigmas")) c.bound_sigmas = as_double(*s, "checks.bound_sigmas");
    if (const json* m = maybe(j, "max_conservation_residual"))
        c.max_conservation_residual = as_double(*m, "checks.max_conservation_residual");
    return c;
}

bool filesystem_safe(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '-' || c == '.';
    });
}

void validate_protocol(const Scenario& sc, std::vector<std::string>& findings) {
    const ProtocolSection& p = *sc.protocol;
    const NetworkGraph& net = sc.network;
    const int n = net.node_count();
    auto node_ok = [&](NodeId id, const char* what) {
        if (id < 0 || id >= n) {
            findings.push_back(std::string(what) + " node " + std::to_string(id) +
                               " is outside the network");
            return false;
        }
        return true;
    };
    auto need_edge = [&](NodeId a, NodeId b, long long pairs) {
        if (!net.has_edge(a, b)) {
            findings.push_back("nodes " + std::to_string(a) + " and " + std::to_string(b) +
                               " share no edge");
            return;
        }
        Endowment e = net.endowment(a, b);
        if (e.has_value() && *e < pairs)
            findings.push_back("edge (" + std::to_string(a) + "," + std::to_string(b) +
                               ") endowment " + std::to_string(*e) + " is below the " +
                               std::to_string(pairs) + " pair(s) one run consumes");
    };
    auto need_free_slot = [&](NodeId id, const char* what) {
        if (net.capacity(id) <= net.qubit_budget(id))
            findings.push_back(std::string(what) + " node " + std::to_string(id) +
                               " has no free data slot to receive into");
    };

    switch (p.kind) {
        case ProtocolKind::Teleport:
            if (node_ok(p.from, "sending") && node_ok(p.to, "receiving")) {
                if (p.from == p.to) findings.push_back("teleport endpoints must differ");
                else {
                    need_edge(p.from, p.to, 1);
                    need_free_slot(p.to, "receiving");
                }
            }
            break;
        case ProtocolKind::Superdense:
            if (node_ok(p.from, "sending") && node_ok(p.to, "receiving")) {
                if (p.from == p.to) findings.push_back("superdense endpoints must differ");
                else need_edge(p.from, p.to, p.message < 0 ? 4 : 1);
            }
            break;
        case ProtocolKind::SharedCoin:
            if (node_ok(p.from, "first") && node_ok(p.to, "second")) {
                if (p.from == p.to) findings.push_back("coin parties must differ");
                else need_edge(p.from, p.to, 1);
            }
            break;
        case ProtocolKind::EntanglementSwap: {
            if (p.path.size() < 3) {
                findings.push_back("swap path needs at least three nodes");
                break;
            }
            std::set<NodeId> seen;
            bool ids_ok = true;
            for (NodeId id : p.path) {
                ids_ok = node_ok(id, "path") && ids_ok;
                if (!seen.insert(id).second) {
                    findings.push_back("swap path repeats node " + std::to_string(id));
                    ids_ok = false;
                }
            }
            if (ids_ok)
                for (std::size_t i = 0; i + 1 < p.path.size(); ++i)
                    need_edge(p.path[i], p.path[i + 1], 1);
            break;
        }
        case ProtocolKind::DistributedCnot:
            if (node_ok(p.control, "control") && node_ok(p.target, "target")) {
                if (p.control == p.target) findings.push_back("control and target must differ");
                else need_edge(p.control, p.target, 1);
            }
            break;
        case ProtocolKind::ControlledTeleport: {
            bool ok = node_ok(p.source, "source") && node_ok(p.controller, "controller") &&
                      node_ok(p.receiver, "receiver");
            if (ok && (p.source == p.controller || p.source == p.receiver ||
                       p.controller == p.receiver))
                findings.push_back("controlled teleport parties must be pairwise distinct");
            else if (ok)
                need_free_slot(p.receiver, "receiving");
            break;
        }
    }

    if (sc.engine == EngineChoice::Stabilizer)
        findings.push_back("protocol scenarios require the dense engine for state readout");
    if (net.total_qubits() + 3 > kMaxStatevectorQubits)
        findings.push_back("network too large for a dense protocol run (limit " +
                           std::to_string(kMaxStatevectorQubits) + " wires incl. workspace)");
}

void validate_scrambling(const Scenario& sc, std::vector<std::string>& findings) {
    const ScramblingSection& s = *sc.scrambling;
    const NetworkGraph& net = sc.network;
    if (s.r_node < 0 || s.r_node >= net.node_count()) {
        findings.push_back("scrambling.R node " + std::to_string(s.r_node) +
                           " is outside the network");
        return;
    }
    if (s.r_size < 1 || s.r_size > net.qubit_budget(s.r_node))
        findings.push_back("scrambling.R_size must lie in [1, qubit budget of R's node]");
    if (s.d_size < 0 || s.d_size > net.total_qubits() - s.r_size)
        findings.push_back("scrambling.D_size must lie in [0, total qubits - R_size]");
    if (!s.d_targets.empty()) {
        if (static_cast<int>(s.d_targets.size()) != s.d_size)
            findings.push_back("scrambling.D_targets must list exactly D_size qubits");
        std::set<int> uniq;
        const int r_lo = net.qubit_offset(s.r_node);
        const int r_hi = r_lo + s.r_size;
        for (int q : s.d_targets) {
            if (q < 0 || q >= net.total_qubits())
                findings.push_back("D_target qubit " + std::to_string(q) + " is out of range");
            else if (q >= r_lo && q < r_hi)
                findings.push_back("D_target qubit " + std::to_string(q) + " overlaps R's block");
            if (!uniq.insert(q).second)
                findings.push_back("D_target qubit " + std::to_string(q) + " repeats");
        }
    }
    if (s.rounds < 1) findings.push_back("scrambling.rounds must be >= 1");
    if (s.t_budget < 0) findings.push_back("scrambling.t_budget must be >= 0");
    if (s.t_budget > 0 && s.gate_source != GateSourceKind::TDoped)
        findings.push_back("t_budget needs gate_source \"t_doped\"");
    for (const auto& round : s.schedule)
        for (const EdgeKey& e : round)
            if (!net.has_edge(e.a, e.b))
                findings.push_back("schedule edge (" + std::to_string(e.a) + "," +
                                   std::to_string(e.b) + ") is not in the network");
    if (s.trials && *s.trials < 1) findings.push_back("scrambling.trials must be >= 1");
    const int max_subset = s.node_subsets ? net.node_count() : net.total_qubits();
    for (int size : s.subsets)
        if (size < 1 || size > max_subset)
            findings.push_back("subset size " + std::to_string(size) + " must lie in [1, " +
                               std::to_string(max_subset) + "]");

    const bool clifford_ok =
        s.gate_source == GateSourceKind::Clifford || s.gate_source == GateSourceKind::Identity;
    const int wires = net.total_qubits() + s.r_size + s.d_size;
    switch (sc.engine) {
        case EngineChoice::Dense:
            if (wires > kMaxStatevectorQubits)
                findings.push_back("dense engine supports at most " +
                                   std::to_string(kMaxStatevectorQubits) + " wires, scenario needs " +
                                   std::to_string(wires));
            break;
        case EngineChoice::Stabilizer:
            if (!clifford_ok)
                findings.push_back("haar/t_doped gate sources need the dense engine");
            break;
        case EngineChoice::Auto:
            if (!clifford_ok && wires > kMaxStatevectorQubits)
                findings.push_back("non-Clifford gate source with " + std::to_string(wires) +
                                   " wires fits neither engine");
            break;
    }
}

}  // namespace

EngineChoice engine_choice_from_string(const std::string& s) {
    if (s == "dense") return EngineChoice::Dense;
    if (s == "stabilizer") return EngineChoice::Stabilizer;
    if (s == "auto") return EngineChoice::Auto;
    throw ParseError("unknown engine '" + s + "' (dense|stabilizer|auto)");
}

const char* engine_choice_name(EngineChoice c) {
    switch (c) {
        case EngineChoice::Dense: return "dense";
        case EngineChoice::Stabilizer: return "stabilizer";
        default: return "auto";
    }
}

ProtocolKind protocol_kind_from_string(const std::string& s) {
    if (s == "teleport") return ProtocolKind::Teleport;
    if (s == "superdense") return ProtocolKind::Superdense;
    if (s == "entanglement_swap") return ProtocolKind::EntanglementSwap;
    if (s == "distributed_cnot") return ProtocolKind::DistributedCnot;
    if (s == "controlled_teleport") return ProtocolKind::ControlledTeleport;
    if (s == "shared_coin") return ProtocolKind::SharedCoin;
    throw ParseError("unknown protocol kind '" + s + "'");
}

const char* protocol_kind_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::Teleport: return "teleport";
        case ProtocolKind::Superdense: return "superdense";
        case ProtocolKind::EntanglementSwap: return "entanglement_swap";
        case ProtocolKind::DistributedCnot: return "distributed_cnot";
        case ProtocolKind::ControlledTeleport: return "controlled_teleport";
        default: return "shared_coin";
    }
}

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(strip_exception_tag(e.what()));
    }
    if (!doc.is_object()) throw ParseError("scenario document must be a JSON object");
    check_keys(doc, "scenario",
               {"schema_version", "name", "engine", "seed", "trials", "epsilon", "out_dir",
                "network", "protocol", "scrambling", "checks"});
    if (const json* v = maybe(doc, "schema_version")) {
        if (as_int(*v, "schema_version") != 1)
            throw ParseError("unsupported schema_version (this build reads version 1)");
    }

    std::vector<std::string> findings;
    Scenario sc;
    if (const json* n = maybe(doc, "name")) sc.name = as_string(*n, "name");
    if (const json* e = maybe(doc, "engine"))
        sc.engine = engine_choice_from_string(as_string(*e, "engine"));
    if (const json* s = maybe(doc, "seed")) sc.seed = as_u64(*s, "seed");
    if (const json* t = maybe(doc, "trials")) sc.trials = as_int(*t, "trials");
    if (const json* ep = maybe(doc, "epsilon")) sc.epsilon = as_double(*ep, "epsilon");
    if (const json* o = maybe(doc, "out_dir")) sc.out_dir = as_string(*o, "out_dir");
    if (const json* c = maybe(doc, "checks")) sc.checks = parse_checks(*c);
    sc.source_text = text;

    ParsedNetwork net = parse_network(require(doc, "network", "scenario"), findings);
    sc.network = std::move(net.graph);

    const json* proto = maybe(doc, "protocol");
    const json* scram = maybe(doc, "scrambling");
    if ((proto != nullptr) == (scram != nullptr))
        findings.push_back("a scenario carries exactly one of 'protocol' or 'scrambling'");
    if (proto && !scram) sc.protocol = parse_protocol(*proto, findings);
    if (scram && !proto) sc.scrambling = parse_scrambling(*scram);

    if (!filesystem_safe(sc.name))
        findings.push_back("name must be nonempty and use only [A-Za-z0-9._-]");
    if (sc.trials < 1) findings.push_back("trials must be >= 1");
    if (!(sc.epsilon > 0)) findings.push_back("epsilon must be positive");
    if (!(sc.checks.bound_sigmas >= 0)) findings.push_back("checks.bound_sigmas must be >= 0");
    if (!(sc.checks.min_fidelity >= 0 && sc.checks.min_fidelity <= 1))
        findings.push_back("checks.min_fidelity must lie in [0,1]");

    if (sc.protocol) validate_protocol(sc, findings);
    if (sc.scrambling) validate_scrambling(sc, findings);

    if (!findings.empty()) {
        std::ostringstream msg;
        for (std::size_t i = 0; i < findings.size(); ++i) {
            if (i) msg << "; ";
            msg << findings[i];
        }
        throw SemanticError(msg.str());
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

EngineKind resolve_engine(const Scenario& sc) {
    if (sc.protocol) return EngineKind::Dense;
    const ScramblingSection& s = *sc.scrambling;
    const bool clifford_ok =
        s.gate_source == GateSourceKind::Clifford || s.gate_source == GateSourceKind::Identity;
    switch (sc.engine) {
        case EngineChoice::Dense: return EngineKind::Dense;
        case EngineChoice::Stabilizer: return EngineKind::Stabilizer;
        case EngineChoice::Auto:
            return clifford_ok && scenario_wire_count(sc) > kMaxStatevectorQubits
                       ? EngineKind::Stabilizer
                       : EngineKind::Dense;
    }
    return EngineKind::Dense;
}

int scenario_wire_count(const Scenario& sc) {
    int wires = sc.network.total_qubits();
    if (sc.scrambling) wires += sc.scrambling->r_size + sc.scrambling->d_size;
    return wires;
}

}  // namespace qnet
