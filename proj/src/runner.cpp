#include "qnet/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qnet/emit.hpp"
#include "qnet/errors.hpp"
#include "qnet/protocol.hpp"

namespace qnet {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string resolve_out_dir(const Scenario& sc, const RunOptions& opts) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    if (!sc.out_dir.empty()) return sc.out_dir;
    if (const char* env = std::getenv("QNET_OUT_DIR"); env && *env) return env;
    return ".";
}

int effective_trials(const Scenario& sc, const RunOptions& opts) {
    if (opts.trials) {
        if (*opts.trials < 1) throw SemanticError("trials must be >= 1");
        return *opts.trials;
    }
    if (sc.scrambling && sc.scrambling->trials) return *sc.scrambling->trials;
    return sc.trials;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct Stats {
    double mean = kNaN;
    double stderr_ = kNaN;
    double min = kNaN;
    double max = kNaN;
};

Stats summarize(const std::vector<double>& xs) {
    Stats s;
    if (xs.empty()) return s;
    double sum = 0;
    s.min = xs[0];
    s.max = xs[0];
    for (double x : xs) {
        sum += x;
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                              static_cast<double>(xs.size()));
    }
    return s;
}

json number_or_null(double x) {
    if (std::isnan(x)) return nullptr;
    return x;
}

std::string term_list_to_string(const TermList& terms) {
    std::ostringstream os;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) os << " + ";
        os << terms[i].amount << "*" << species_to_string(terms[i].key);
    }
    return os.str();
}

std::string inequality_to_string(const ResourceInequality& iq) {
    return term_list_to_string(iq.consumed) + " >= " + term_list_to_string(iq.produced);
}

// ---------------------------------------------------------------------------
// protocol trials

struct ProtoTrial {
    double fidelity = kNaN;  // NaN: not applicable
    bool inequality_applicable = false;
    bool inequality_pass = true;
    std::vector<std::string> mismatches;
    bool exact_applicable = false;  // superdense decode match
    int agree = 0;
    int total = 0;
    double mi = kNaN;  // post-swap end-to-end entanglement
    int coin = -1;
};

ProtocolRun fresh_protocol_run(const Scenario& sc, std::uint64_t seed) {
    ProtocolRunConfig cfg;
    cfg.engine = EngineKind::Dense;
    cfg.seed = seed;
    if (sc.protocol->kind == ProtocolKind::ControlledTeleport) {
        const ProtocolSection& p = *sc.protocol;
        cfg.initial_stocks = {{stock_key("GHZ", {p.source, p.controller, p.receiver}), 1}};
    }
    return make_run(sc.network, cfg);
}

double overlap_fidelity(const CVec& a, const CVec& b) {
    CVec an = a.normalized();
    CVec bn = b.normalized();
    return std::norm(an.dot(bn));
}

void prep_random_qubit(ProtocolRun& run, int wire) {
    CMat u = haar_unitary(1, run.rng);
    run.state->apply_local(LocalUnitary{{}, u}, {wire});
}

ResourceInequality shared_coin_inequality(NodeId a, NodeId b) {
    return {{{stock_key("[qq]", {a, b}), 1}}, {{stock_key("[cc]", {a, b}), 1}}};
}

void check_run_inequality(const ProtocolRun& run, const ResourceInequality& iq, ProtoTrial& out) {
    InequalityCheck chk = check_inequality(run.trace, run.ledger, run.achieved, iq);
    out.inequality_applicable = true;
    out.inequality_pass = out.inequality_pass && chk.pass;
    for (const std::string& m : chk.mismatches) out.mismatches.push_back(m);
}

ProtoTrial run_superdense_message(const Scenario& sc, std::uint64_t seed, int message) {
    const ProtocolSection& p = *sc.protocol;
    ProtocolRun run = fresh_protocol_run(sc, seed);
    int decoded = superdense_send(run, p.from, p.to, message, p.noise);
    ProtoTrial out;
    out.exact_applicable = true;
    out.total = 1;
    out.agree = decoded == message ? 1 : 0;
    check_run_inequality(run, superdense_inequality(p.from, p.to), out);
    return out;
}

ProtoTrial run_protocol_trial(const Scenario& sc, std::uint64_t seed) {
    const ProtocolSection& p = *sc.protocol;
    ProtoTrial out;
    switch (p.kind) {
        case ProtocolKind::Teleport: {
            ProtocolRun run = fresh_protocol_run(sc, seed);
            prep_random_qubit(run, run.reg.wire_of(p.from, 0));
            CVec before = state_in_logical_order(run);
            teleport(run, p.from, 0, p.to);
            out.fidelity = overlap_fidelity(before, state_in_logical_order(run));
            check_run_inequality(run, teleport_inequality(p.from, p.to), out);
            break;
        }
        case ProtocolKind::Superdense: {
            if (p.message >= 0) {
                out = run_superdense_message(sc, seed, p.message);
            } else {
                for (int m = 0; m < 4; ++m) {
                    ProtoTrial one = run_superdense_message(
                        sc, derive_seed(seed, static_cast<std::uint64_t>(m)), m);
                    out.exact_applicable = true;
                    out.total += one.total;
                    out.agree += one.agree;
                    out.inequality_applicable = true;
                    out.inequality_pass = out.inequality_pass && one.inequality_pass;
                    for (const std::string& s : one.mismatches) out.mismatches.push_back(s);
                }
            }
            break;
        }
        case ProtocolKind::EntanglementSwap: {
            ProtocolRun run = fresh_protocol_run(sc, seed);
            swap_chain(run, p.path, p.parallel);
            SpeciesKey key = stock_key("[qq]", {p.path.front(), p.path.back()});
            const auto& units = run.stock_wires.at(key);
            const std::vector<int>& unit = units.back();
            out.mi = run.state->mutual_information_bits({unit[0]}, {unit[1]});
            if (p.path.size() == 3)
                check_run_inequality(run, swap_inequality(p.path[1], p.path[0], p.path[2]), out);
            break;
        }
        case ProtocolKind::DistributedCnot: {
            ProtocolRun run = fresh_protocol_run(sc, seed);
            const int wc = run.reg.wire_of(p.control, 0);
            const int wt = run.reg.wire_of(p.target, 0);
            CMat u = haar_unitary(2, run.rng);
            run.state->apply_local(LocalUnitary{{}, u}, {wc, wt});
            CVec before = state_in_logical_order(run);
            const int lc = sc.network.qubit_offset(p.control);
            const int lt = sc.network.qubit_offset(p.target);
            CVec expected = before;
            const std::size_t cbit = std::size_t{1} << lc;
            const std::size_t tbit = std::size_t{1} << lt;
            for (std::size_t i = 0; i < static_cast<std::size_t>(expected.size()); ++i)
                if ((i & cbit) && !(i & tbit))
                    std::swap(expected[static_cast<Eigen::Index>(i)],
                              expected[static_cast<Eigen::Index>(i | tbit)]);
            distributed_cnot(run, p.control, p.target);
            out.fidelity = overlap_fidelity(expected, state_in_logical_order(run));
            check_run_inequality(run, distributed_cnot_inequality(p.control, p.target), out);
            break;
        }
        case ProtocolKind::ControlledTeleport: {
            ProtocolRun run = fresh_protocol_run(sc, seed);
            prep_random_qubit(run, run.reg.wire_of(p.source, 0));
            CVec before = state_in_logical_order(run);
            controlled_teleport_ghz(run, p.source, p.controller, p.receiver, p.cooperate);
            if (p.cooperate) {
                out.fidelity = overlap_fidelity(before, state_in_logical_order(run));
                check_run_inequality(
                    run, controlled_teleport_inequality(p.source, p.controller, p.receiver), out);
            }
            break;
        }
        case ProtocolKind::SharedCoin: {
            ProtocolRun run = fresh_protocol_run(sc, seed);
            out.coin = shared_coin(run, p.from, p.to);
            check_run_inequality(run, shared_coin_inequality(p.from, p.to), out);
            break;
        }
    }
    return out;
}

// The run whose trace becomes the emitted artifact set: trial 0 replayed
// (message 0 stands in when a superdense scenario cycles all four).
ProtocolRun artifact_protocol_run(const Scenario& sc) {
    const ProtocolSection& p = *sc.protocol;
    const std::uint64_t seed = derive_seed(sc.seed, 0);
    ProtocolRun run = fresh_protocol_run(
        sc, p.kind == ProtocolKind::Superdense && p.message < 0 ? derive_seed(seed, 0) : seed);
    switch (p.kind) {
        case ProtocolKind::Teleport:
            prep_random_qubit(run, run.reg.wire_of(p.from, 0));
            teleport(run, p.from, 0, p.to);
            break;
        case ProtocolKind::Superdense:
            superdense_send(run, p.from, p.to, std::max(p.message, 0), p.noise);
            break;
        case ProtocolKind::EntanglementSwap:
            swap_chain(run, p.path, p.parallel);
            break;
        case ProtocolKind::DistributedCnot: {
            CMat u = haar_unitary(2, run.rng);
            run.state->apply_local(LocalUnitary{{}, u},
                                   {run.reg.wire_of(p.control, 0), run.reg.wire_of(p.target, 0)});
            distributed_cnot(run, p.control, p.target);
            break;
        }
        case ProtocolKind::ControlledTeleport:
            prep_random_qubit(run, run.reg.wire_of(p.source, 0));
            controlled_teleport_ghz(run, p.source, p.controller, p.receiver, p.cooperate);
            break;
        case ProtocolKind::SharedCoin:
            shared_coin(run, p.from, p.to);
            break;
    }
    return run;
}

ResourceInequality declared_inequality(const ProtocolSection& p) {
    switch (p.kind) {
        case ProtocolKind::Teleport: return teleport_inequality(p.from, p.to);
        case ProtocolKind::Superdense: return superdense_inequality(p.from, p.to);
        case ProtocolKind::EntanglementSwap:
            return swap_inequality(p.path[1], p.path.front(), p.path.back());
        case ProtocolKind::DistributedCnot: return distributed_cnot_inequality(p.control, p.target);
        case ProtocolKind::ControlledTeleport:
            return controlled_teleport_inequality(p.source, p.controller, p.receiver);
        default: return shared_coin_inequality(p.from, p.to);
    }
}

// ---------------------------------------------------------------------------
// scrambling trials

ScramblingSpec to_scrambling_spec(const Scenario& sc) {
    const ScramblingSection& s = *sc.scrambling;
    ScramblingSpec spec;
    spec.net = &sc.network;
    spec.r_node = s.r_node;
    spec.r_size = s.r_size;
    spec.d_size = s.d_size;
    spec.d_targets = s.d_targets;
    spec.rounds = s.rounds;
    spec.gate_source = s.gate_source;
    spec.t_budget = s.t_budget;
    spec.policy = s.policy;
    spec.schedule = s.schedule;
    spec.seed = sc.seed;
    spec.engine = resolve_engine(sc);
    return spec;
}

struct ScrambleTrial {
    double residual = 0;
    double adversary_mi = 0;  // I(R' : custody minus the data-center targets)
    bool connected = true;
    bool cone_covered = true;
};

ScrambleTrial run_scramble_trial(const ScramblingSpec& base, std::uint64_t seed) {
    ScramblingSpec spec = base;
    spec.seed = seed;
    ScrambleOutcome outcome = run_scrambling(spec);
    std::vector<int> custody = custody_wires(outcome);
    std::vector<int> targets = current_wires(outcome.run, outcome.d_target_logicals);
    std::sort(targets.begin(), targets.end());
    std::vector<int> rest;
    std::set_difference(custody.begin(), custody.end(), targets.begin(), targets.end(),
                        std::back_inserter(rest));
    std::vector<int> d_system = outcome.d_wires;
    d_system.insert(d_system.end(), targets.begin(), targets.end());
    std::sort(d_system.begin(), d_system.end());
    ScrambleTrial t;
    t.residual = conservation_check(*outcome.run.state, outcome.r_prime_wires, d_system, rest,
                                    spec.r_size);
    t.adversary_mi = outcome.run.state->mutual_information_bits(outcome.r_prime_wires, rest);
    t.connected = outcome.schedule_connected;
    t.cone_covered = outcome.cone_covered;
    return t;
}

// ---------------------------------------------------------------------------
// report plumbing

struct CheckRow {
    std::string name;
    bool pass = true;
    std::string detail;
};

json checks_to_json(const std::vector<CheckRow>& checks) {
    json arr = json::array();
    for (const CheckRow& c : checks)
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return arr;
}

json counts_to_json(const std::map<SpeciesKey, long long>& counts) {
    json obj = json::object();
    for (const auto& [key, amount] : counts) obj[species_to_string(key)] = amount;
    return obj;
}

json resources_to_json(const ProtocolRun& run) {
    return json{{"species_report", run.ledger.species_report()},
                {"consumed", counts_to_json(run.ledger.consumed_totals())},
                {"credited", counts_to_json(run.ledger.credited_totals())},
                {"channel_uses", counts_to_json(channel_uses(run.trace))},
                {"achieved", term_list_to_string(run.achieved)}};
}

json row_to_json(const DecouplingRow& row) {
    return json{{"n_e", row.n_e},
                {"n_b", row.n_b},
                {"trials", row.trials},
                {"mean_deviation", row.mean_deviation},
                {"stderr_deviation", row.trials > 1 ? json(row.stderr_deviation) : json(nullptr)},
                {"bound", row.bound},
                {"mean_mi", row.mean_mi},
                {"stderr_mi", row.trials > 1 ? json(row.stderr_mi) : json(nullptr)}};
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text,
                     std::vector<std::string>& artifacts) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw EngineError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw EngineError("short write to '" + path.string() + "'");
    artifacts.push_back(path.string());
}

void emit_trace_artifacts(const CausalTrace& trace, const std::filesystem::path& dir,
                          const std::string& stem, json& artifact_index,
                          std::vector<std::string>& artifacts) {
    DiagramStyle style;
    write_text_file(dir / (stem + ".trace.jsonl"), to_jsonl(trace), artifacts);
    write_text_file(dir / (stem + ".dot"), to_dot(trace, style, RenderMode::Full), artifacts);
    write_text_file(dir / (stem + ".svg"), to_svg(trace, style, RenderMode::Full), artifacts);
    artifact_index["trace"] = stem + ".trace.jsonl";
    artifact_index["dot"] = stem + ".dot";
    artifact_index["svg"] = stem + ".svg";
}

bool monotone_within(const DecouplingReport& rows, double sigmas) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double slack_prev = std::isnan(rows[i - 1].stderr_mi) ? 0.0 : rows[i - 1].stderr_mi;
        double slack_here = std::isnan(rows[i].stderr_mi) ? 0.0 : rows[i].stderr_mi;
        double slack = sigmas * std::sqrt(slack_prev * slack_prev + slack_here * slack_here);
        if (rows[i].mean_mi < rows[i - 1].mean_mi - slack) return false;
    }
    return true;
}

}  // namespace

CommandResult cmd_validate(const std::string& path) {
    Scenario sc = load_scenario(path);
    CommandResult result;
    std::ostringstream line;
    line << "ok: " << sc.name << " (" << (sc.protocol ? "protocol" : "scrambling") << ", engine "
         << engine_kind_name(resolve_engine(sc)) << ", " << sc.network.node_count() << " nodes, "
         << sc.network.total_qubits() << " qubits)";
    result.lines.push_back(line.str());
    return result;
}

CommandResult cmd_run(const std::string& path, const RunOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    Scenario sc = load_scenario(path);
    if (opts.seed) sc.seed = *opts.seed;
    if (opts.epsilon) {
        if (!(*opts.epsilon > 0)) throw SemanticError("epsilon must be positive");
        sc.epsilon = *opts.epsilon;
    }
    const int trials = effective_trials(sc, opts);
    const EngineKind engine = resolve_engine(sc);
    const std::filesystem::path dir = resolve_out_dir(sc, opts);
    std::filesystem::create_directories(dir);

    CommandResult result;
    std::vector<CheckRow> checks;
    json results;
    json artifact_index = json::object();
    json resources;
    std::vector<std::string> notes;

    if (sc.protocol) {
        const ProtocolSection& p = *sc.protocol;
        std::vector<ProtoTrial> rows(static_cast<std::size_t>(trials));
        parallel_for(trials, opts.jobs, [&](int t) {
            rows[static_cast<std::size_t>(t)] =
                run_protocol_trial(sc, derive_seed(sc.seed, static_cast<std::uint64_t>(t)));
        });

        std::vector<double> fidelities;
        std::vector<double> mis;
        int ineq_pass = 0, ineq_total = 0;
        int agree = 0, total_msgs = 0;
        int coin_ones = 0, coin_total = 0;
        std::vector<std::string> mismatches;
        for (const ProtoTrial& row : rows) {
            if (!std::isnan(row.fidelity)) fidelities.push_back(row.fidelity);
            if (!std::isnan(row.mi)) mis.push_back(row.mi);
            if (row.inequality_applicable) {
                ++ineq_total;
                if (row.inequality_pass) ++ineq_pass;
            }
            if (row.exact_applicable) {
                agree += row.agree;
                total_msgs += row.total;
            }
            if (row.coin >= 0) {
                ++coin_total;
                coin_ones += row.coin;
            }
            for (const std::string& m : row.mismatches)
                if (mismatches.size() < 8) mismatches.push_back(m);
        }

        results["protocol"] = protocol_kind_name(p.kind);
        results["trials"] = trials;
        results["declared_inequality"] = inequality_to_string(declared_inequality(p));
        if (!fidelities.empty()) {
            Stats f = summarize(fidelities);
            results["fidelity"] = {{"mean", f.mean},
                                   {"min", f.min},
                                   {"stderr", number_or_null(f.stderr_)}};
            checks.push_back({"fidelity", f.min >= sc.checks.min_fidelity,
                              "min " + format_double(f.min) + " vs floor " +
                                  format_double(sc.checks.min_fidelity)});
        }
        if (!mis.empty()) {
            Stats m = summarize(mis);
            results["end_to_end_mi_bits"] = {{"mean", m.mean},
                                             {"min", m.min},
                                             {"stderr", number_or_null(m.stderr_)}};
            checks.push_back({"swap_entanglement", std::abs(m.min - 2.0) <= 1e-9 &&
                                                       std::abs(m.max - 2.0) <= 1e-9,
                              "I(ends) " + format_double(m.mean) + " bits, expected 2"});
        }
        if (ineq_total > 0) {
            results["inequality"] = {{"pass", ineq_pass},
                                     {"total", ineq_total},
                                     {"mismatches", mismatches}};
            if (sc.checks.inequality)
                checks.push_back({"inequality", ineq_pass == ineq_total,
                                  std::to_string(ineq_pass) + "/" + std::to_string(ineq_total) +
                                      " runs balanced"});
        }
        if (total_msgs > 0) {
            results["decode"] = {{"agree", agree}, {"total", total_msgs}};
            if (p.noise == 0.0)
                checks.push_back({"superdense_exact", agree == total_msgs,
                                  std::to_string(agree) + "/" + std::to_string(total_msgs) +
                                      " messages decoded"});
            else
                notes.push_back("noisy channel: decode agreement reported, not gated");
        }
        if (coin_total > 0)
            results["coin"] = {{"ones", coin_ones}, {"zeros", coin_total - coin_ones}};
        if (!p.cooperate && p.kind == ProtocolKind::ControlledTeleport)
            notes.push_back("controller declined cooperation: fidelity not applicable");

        ProtocolRun artifact_run = artifact_protocol_run(sc);
        for (const std::string& n : artifact_run.notes) notes.push_back(n);
        resources = resources_to_json(artifact_run);
        emit_trace_artifacts(artifact_run.trace, dir, sc.name, artifact_index, result.artifacts);
    } else {
        const ScramblingSection& s = *sc.scrambling;
        ScramblingSpec base = to_scrambling_spec(sc);

        std::vector<ScrambleTrial> trows(static_cast<std::size_t>(trials));
        parallel_for(trials, opts.jobs, [&](int t) {
            trows[static_cast<std::size_t>(t)] =
                run_scramble_trial(base, derive_seed(sc.seed, static_cast<std::uint64_t>(t)));
        });

        std::vector<double> residuals, adversary;
        bool all_connected = true;
        bool cone_covered = true;
        for (const ScrambleTrial& t : trows) {
            residuals.push_back(t.residual);
            adversary.push_back(t.adversary_mi);
            all_connected = all_connected && t.connected;
            cone_covered = cone_covered && t.cone_covered;
        }
        Stats res = summarize(residuals);
        Stats adv = summarize(adversary);

        DecouplingReport rows;
        rows.resize(s.subsets.size());
        parallel_for(static_cast<int>(s.subsets.size()), opts.jobs, [&](int i) {
            const int size = s.subsets[static_cast<std::size_t>(i)];
            rows[static_cast<std::size_t>(i)] =
                s.node_subsets ? sample_decoupling_nodes(base, size, trials)
                               : sample_decoupling(base, size, trials);
        });

        results["gate_source"] = gate_source_name(s.gate_source);
        results["schedule_policy"] = schedule_policy_name(s.policy);
        results["rounds"] = s.rounds;
        results["trials"] = trials;
        results["schedule_connected"] = all_connected;
        results["cone_covered"] = cone_covered;
        results["diameter"] = sc.network.connected() ? json(sc.network.diameter()) : json(nullptr);
        results["query_cost"] = query_cost_estimate(sc.network.total_qubits() + s.r_size,
                                                    s.t_budget);
        results["conservation"] = {{"mean_residual", res.mean},
                                   {"max_residual", res.max},
                                   {"stderr", number_or_null(res.stderr_)}};
        results["adversary_mi_bits"] = {{"mean", adv.mean},
                                        {"min", adv.min},
                                        {"max", adv.max},
                                        {"stderr", number_or_null(adv.stderr_)}};
        json row_arr = json::array();
        for (const DecouplingRow& row : rows) row_arr.push_back(row_to_json(row));
        results["decoupling"] = row_arr;
        if (!rows.empty())
            results["monotone_mi"] = monotone_within(rows, 2.0);

        if (sc.checks.require_connected)
            checks.push_back({"schedule_connected", all_connected,
                              all_connected ? "every node reachable through scheduled edges"
                                            : "ScheduleDisconnected"});
        checks.push_back({"conservation", res.max <= sc.checks.max_conservation_residual,
                          "max residual " + format_double(res.max) + " vs " +
                              format_double(sc.checks.max_conservation_residual)});
        const bool two_design = s.gate_source == GateSourceKind::Haar ||
                                s.gate_source == GateSourceKind::Clifford;
        if (sc.checks.bound.value_or(two_design) && !rows.empty()) {
            bool ok = true;
            std::string detail;
            for (const DecouplingRow& row : rows) {
                double slack = std::isnan(row.stderr_deviation) || row.trials < 2
                                   ? 0.0
                                   : sc.checks.bound_sigmas * row.stderr_deviation;
                if (row.mean_deviation > row.bound + slack) {
                    ok = false;
                    detail = "n_e " + std::to_string(row.n_e) + ": " +
                             format_double(row.mean_deviation) + " > " +
                             format_double(row.bound + slack);
                    break;
                }
            }
            checks.push_back({"decoupling_bound", ok, ok ? "all rows within bound" : detail});
        }

        ScramblingSpec artifact_spec = base;
        artifact_spec.seed = derive_seed(sc.seed, 0);
        ScrambleOutcome artifact = run_scrambling(artifact_spec);
        for (const std::string& w : artifact.warnings) notes.push_back(w);
        resources = resources_to_json(artifact.run);
        emit_trace_artifacts(artifact.run.trace, dir, sc.name, artifact_index, result.artifacts);
    }

    bool all_pass = true;
    for (const CheckRow& c : checks) all_pass = all_pass && c.pass;

    json report;
    report["schema_version"] = 1;
    report["name"] = sc.name;
    report["engine"] = engine_kind_name(engine);
    report["seed"] = sc.seed;
    report["epsilon"] = sc.epsilon;
    report["scenario"] = json::parse(sc.source_text);
    report["results"] = results;
    report["checks"] = checks_to_json(checks);
    report["resources"] = resources;
    report["notes"] = notes;
    report["artifacts"] = artifact_index;
    const auto t_end = std::chrono::steady_clock::now();
    report["timing"] = {
        {"total_ms",
         std::chrono::duration_cast<std::chrono::microseconds>(t_end - t_start).count() / 1000.0}};

    result.report_json = report.dump(2) + "\n";
    write_text_file(dir / (sc.name + ".report.json"), result.report_json, result.artifacts);

    for (const CheckRow& c : checks)
        result.lines.push_back(std::string("check ") + c.name + ": " +
                               (c.pass ? "pass" : "FAIL") + " (" + c.detail + ")");
    result.lines.push_back((all_pass ? "ok: " : "failed: ") + sc.name + " report written");
    result.exit_code = all_pass ? 0 : 2;
    return result;
}

CommandResult cmd_sweep(const std::string& path, const std::vector<int>& sizes,
                        const RunOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    Scenario sc = load_scenario(path);
    if (opts.seed) sc.seed = *opts.seed;
    if (!sc.scrambling)
        throw SemanticError("sweep needs a scrambling scenario, this one runs a protocol");
    const ScramblingSection& s = *sc.scrambling;
    std::vector<int> sweep_sizes = sizes.empty() ? s.subsets : sizes;
    if (sweep_sizes.empty())
        throw SemanticError("sweep needs subset sizes (--sizes or the scenario's subsets)");
    const int max_size = s.node_subsets ? sc.network.node_count() : sc.network.total_qubits();
    for (int size : sweep_sizes)
        if (size < 1 || size > max_size)
            throw SemanticError("sweep size " + std::to_string(size) + " must lie in [1, " +
                                std::to_string(max_size) + "]");
    const int trials = effective_trials(sc, opts);
    const std::filesystem::path dir = resolve_out_dir(sc, opts);
    std::filesystem::create_directories(dir);

    ScramblingSpec base = to_scrambling_spec(sc);
    DecouplingReport rows;
    rows.resize(sweep_sizes.size());
    parallel_for(static_cast<int>(sweep_sizes.size()), opts.jobs, [&](int i) {
        const int size = sweep_sizes[static_cast<std::size_t>(i)];
        rows[static_cast<std::size_t>(i)] = s.node_subsets
                                                ? sample_decoupling_nodes(base, size, trials)
                                                : sample_decoupling(base, size, trials);
    });

    json report;
    report["schema_version"] = 1;
    report["name"] = sc.name;
    report["engine"] = engine_kind_name(resolve_engine(sc));
    report["seed"] = sc.seed;
    report["trials"] = trials;
    report["granularity"] = s.node_subsets ? "nodes" : "qubits";
    json row_arr = json::array();
    for (const DecouplingRow& row : rows) row_arr.push_back(row_to_json(row));
    report["rows"] = row_arr;
    report["monotone_mi"] = monotone_within(rows, 2.0);
    const auto t_end = std::chrono::steady_clock::now();
    report["timing"] = {
        {"total_ms",
         std::chrono::duration_cast<std::chrono::microseconds>(t_end - t_start).count() / 1000.0}};

    CommandResult result;
    result.report_json = report.dump(2) + "\n";
    write_text_file(dir / (sc.name + ".sweep.json"), result.report_json, result.artifacts);

    std::ostringstream csv;
    csv << "n_e,n_b,trials,mean_deviation,stderr_deviation,bound,mean_mi,stderr_mi\n";
    for (const DecouplingRow& row : rows) {
        csv << row.n_e << ',' << row.n_b << ',' << row.trials << ','
            << format_double(row.mean_deviation) << ','
            << (row.trials > 1 ? format_double(row.stderr_deviation) : "") << ','
            << format_double(row.bound) << ',' << format_double(row.mean_mi) << ','
            << (row.trials > 1 ? format_double(row.stderr_mi) : "") << '\n';
    }
    write_text_file(dir / (sc.name + ".sweep.csv"), csv.str(), result.artifacts);

    for (const DecouplingRow& row : rows) {
        std::ostringstream line;
        line << "size " << row.n_e << ": mean I(R':V_E) = " << format_double(row.mean_mi)
             << " bits over " << row.trials << " trials";
        result.lines.push_back(line.str());
    }
    return result;
}

}  // namespace qnet
