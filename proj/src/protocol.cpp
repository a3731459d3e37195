#include "qnet/protocol.hpp"

#include <algorithm>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

int next_step(ProtocolRun& run) { return ++run.wall_step; }

EventId local_event(ProtocolRun& run, NodeId node, const std::string& label, long long units,
                    OpClass op, bool noisy = false) {
    Event e;
    e.node = node;
    e.kind = EventKind::Local;
    e.op_class = op;
    e.noisy = noisy;
    e.units = units;
    e.unit_label = label;
    e.wall_step = run.wall_step;
    return run.trace.record(std::move(e));
}

std::pair<EventId, EventId> send_message(ProtocolRun& run, NodeId from, NodeId to,
                                         const std::string& label, ChannelKind channel,
                                         bool post_consumption, long long units = 1,
                                         bool noisy = false) {
    Event s;
    s.node = from;
    s.kind = EventKind::Send;
    s.channel = channel;
    s.post_consumption = post_consumption;
    s.units = units;
    s.unit_label = label;
    s.noisy = noisy;
    s.wall_step = run.wall_step;
    EventId sid = run.trace.record(std::move(s));
    Event r;
    r.node = to;
    r.kind = EventKind::Receive;
    r.channel = channel;
    r.post_consumption = post_consumption;
    r.units = units;
    r.unit_label = label;
    r.wall_step = run.wall_step;
    r.causes = {sid};
    EventId rid = run.trace.record(std::move(r));
    return {sid, rid};
}

int measure_and_reset(ProtocolRun& run, int wire) {
    int m = run.state->measure_z(wire, run.rng);
    if (m) run.state->apply_gate({Gate::X, wire, 0});
    return m;
}

void ensure_logical(ProtocolRun& run, int wire) {
    if (static_cast<std::size_t>(wire) >= run.wire_logical.size())
        run.wire_logical.resize(static_cast<std::size_t>(wire) + 1, -1);
    if (run.wire_logical[static_cast<std::size_t>(wire)] < 0) {
        run.wire_logical[static_cast<std::size_t>(wire)] = static_cast<int>(run.logical_wire.size());
        run.logical_wire.push_back(wire);
    }
}

void move_logical(ProtocolRun& run, int from_wire, int to_wire) {
    if (static_cast<std::size_t>(to_wire) >= run.wire_logical.size())
        run.wire_logical.resize(static_cast<std::size_t>(to_wire) + 1, -1);
    int logical = from_wire < static_cast<int>(run.wire_logical.size())
                      ? run.wire_logical[static_cast<std::size_t>(from_wire)]
                      : -1;
    if (logical >= 0) {
        run.logical_wire[static_cast<std::size_t>(logical)] = to_wire;
        run.wire_logical[static_cast<std::size_t>(from_wire)] = -1;
    }
    run.wire_logical[static_cast<std::size_t>(to_wire)] = logical;
}

int unit_wire_for(const SpeciesKey& key, const std::vector<int>& unit, NodeId party) {
    auto it = std::find(key.parties.begin(), key.parties.end(), party);
    if (it == key.parties.end()) throw EngineError("party not in species");
    return unit[static_cast<std::size_t>(it - key.parties.begin())];
}

// Pops one stock unit, recording per-party consumption events and the debit.
// [qq] units across an edge are materialized on demand from the endowment.
std::vector<int> consume_unit(ProtocolRun& run, const SpeciesKey& key, const char* error_name) {
    auto& pool = run.stock_wires[key];
    if (pool.empty()) {
        bool replenished = false;
        if (key.label == "[qq]" && key.parties.size() == 2 &&
            run.net->has_edge(key.parties[0], key.parties[1]))
            replenished = materialize_pair(run, key.parties[0], key.parties[1]);
        if (!replenished)
            throw SemanticError(std::string(error_name) + ": no " + species_to_string(key) +
                                " available");
    }
    std::vector<int> unit = pool.front();
    pool.erase(pool.begin());
    next_step(run);
    EventId first = -1;
    for (NodeId p : key.parties) {
        Event e;
        e.node = p;
        e.kind = EventKind::ResourceConsume;
        e.units = 1;
        e.unit_label = key.label;
        e.wall_step = run.wall_step;
        EventId id = run.trace.record(std::move(e));
        if (first < 0) first = id;
    }
    run.ledger.debit(key, 1, first);
    return unit;
}

void add_stock_unit(ProtocolRun& run, const SpeciesKey& key, const std::vector<int>& wires,
                    EventId credit_event) {
    run.ledger.credit(key, 1, credit_event);
    run.stock_wires[key].push_back(wires);
}

// Creation pattern: ResourceCreate at the origin party, a distribution
// send/receive per remote party, then ResourceCreate at each remote party.
EventId record_creation(ProtocolRun& run, const SpeciesKey& key) {
    next_step(run);
    NodeId origin = key.parties[0];
    Event c0;
    c0.node = origin;
    c0.kind = EventKind::ResourceCreate;
    c0.units = 1;
    c0.unit_label = key.label;
    c0.wall_step = run.wall_step;
    EventId first = run.trace.record(std::move(c0));
    for (std::size_t i = 1; i < key.parties.size(); ++i) {
        auto [sid, rid] =
            send_message(run, origin, key.parties[i], key.label, ChannelKind::Quantum, false);
        (void)sid;
        Event ci;
        ci.node = key.parties[i];
        ci.kind = EventKind::ResourceCreate;
        ci.units = 1;
        ci.unit_label = key.label;
        ci.wall_step = run.wall_step;
        ci.causes = {rid};
        run.trace.record(std::move(ci));
    }
    return first;
}

std::vector<int> occupied_slots(const ProtocolRun& run, NodeId node) {
    std::vector<int> out;
    for (int s = 0; s < run.reg.slots(node); ++s)
        if (run.reg.slot_occupied(node, s)) out.push_back(s);
    return out;
}

CVec w_state_amplitudes(int k) {
    CVec v = CVec::Zero(Eigen::Index{1} << k);
    for (int i = 0; i < k; ++i) v[Eigen::Index{1} << i] = 1.0 / std::sqrt(static_cast<double>(k));
    return v;
}

void prepare_stock_state(ProtocolRun& run, const SpeciesKey& key, const std::vector<int>& wires) {
    if (key.label == "[qq]") {
        run.state->apply_gate({Gate::H, wires[0], 0});
        run.state->apply_gate({Gate::CNOT, wires[0], wires[1]});
    } else if (key.label == "GHZ") {
        run.state->apply_gate({Gate::H, wires[0], 0});
        for (std::size_t i = 1; i < wires.size(); ++i)
            run.state->apply_gate({Gate::CNOT, wires[0], wires[i]});
    } else if (key.label == "W") {
        LocalUnitary u;
        u.matrix = state_preparation_unitary(w_state_amplitudes(static_cast<int>(wires.size())));
        run.state->apply_local(u, wires);
    } else {
        throw SemanticError("cannot prepare stock species " + key.label);
    }
}

void materialize_stock_unit(ProtocolRun& run, const SpeciesKey& key) {
    std::vector<int> wires;
    wires.reserve(key.parties.size());
    for (NodeId p : key.parties) {
        int w = run.state->alloc_wire();
        run.transient[p].insert(w);
        wires.push_back(w);
    }
    prepare_stock_state(run, key, wires);
    EventId first = record_creation(run, key);
    add_stock_unit(run, key, wires, first);
}

void bell_measure(ProtocolRun& run, NodeId node, int data_wire, int half_wire, int& m1, int& m2) {
    run.state->apply_gate({Gate::CNOT, data_wire, half_wire});
    run.state->apply_gate({Gate::H, data_wire, 0});
    m1 = measure_and_reset(run, data_wire);
    m2 = measure_and_reset(run, half_wire);
    next_step(run);
    local_event(run, node, "bell_measurement", 2, OpClass::TypeI);
}

// Retires a measured-out wire, whether it sits in a data slot or in the
// node's transient (resource-half) holdings.
void retire_wire(ProtocolRun& run, NodeId node, int wire) {
    auto held = run.transient.find(node);
    if (held != run.transient.end() && held->second.erase(wire) > 0) {
        // transient half, no data slot to clear
    } else {
        run.reg.clear(node, run.reg.slot_of(node, wire));
    }
    if (static_cast<std::size_t>(wire) < run.wire_logical.size())
        run.wire_logical[static_cast<std::size_t>(wire)] = -1;
    run.state->release_wire(wire);
}

// Moves an arriving qubit out of transient holdings into a data slot.
int promote_to_slot(ProtocolRun& run, NodeId node, int wire) {
    run.transient[node].erase(wire);
    return run.reg.take_free_slot(node, wire);
}

}  // namespace

int ProtocolRun::logical_of_slot(NodeId node, int slot) const {
    int w = reg.wire_of(node, slot);
    return static_cast<std::size_t>(w) < wire_logical.size() ? wire_logical[static_cast<std::size_t>(w)]
                                                             : -1;
}

int ProtocolRun::wire_of_logical(int logical) const {
    return logical_wire.at(static_cast<std::size_t>(logical));
}

ProtocolRun make_run(const NetworkGraph& net, const ProtocolRunConfig& cfg) {
    const int initial = net.total_qubits() + cfg.rprime_qubits + cfg.dcenter_qubits;
    int max_wires = cfg.max_wires;
    if (max_wires <= 0)
        max_wires = cfg.engine == EngineKind::Dense ? kMaxStatevectorQubits
                                                    : std::max(32, initial + 16);
    ProtocolRun run{
        .net = &net,
        .engine = cfg.engine,
        .state = EngineState::make(cfg.engine, initial, max_wires),
        .reg = QubitRegister(net, cfg.rprime_qubits, cfg.dcenter_qubits),
        .trace = {},
        .ledger = {},
        .rng = RngStream(cfg.seed),
        .achieved = {},
        .notes = {},
        .wall_step = 0,
        .endowment_drawn = {},
        .stock_wires = {},
        .transient = {},
        .logical_wire = {},
        .wire_logical = {},
    };
    run.logical_wire.resize(static_cast<std::size_t>(initial));
    run.wire_logical.resize(static_cast<std::size_t>(initial));
    for (int i = 0; i < initial; ++i) {
        run.logical_wire[static_cast<std::size_t>(i)] = i;
        run.wire_logical[static_cast<std::size_t>(i)] = i;
    }
    for (const auto& [e, endow] : net.edges())
        if (!endow.has_value()) run.ledger.mark_infinite(stock_key("[qq]", {e.a, e.b}));
    for (const ResourceCount& stock : cfg.initial_stocks)
        for (long long i = 0; i < stock.amount; ++i) materialize_stock_unit(run, stock.key);
    return run;
}

bool pair_available(const ProtocolRun& run, NodeId a, NodeId b) {
    SpeciesKey key = stock_key("[qq]", {a, b});
    auto it = run.stock_wires.find(key);
    if (it != run.stock_wires.end() && !it->second.empty()) return true;
    if (!run.net->has_edge(a, b)) return false;
    Endowment e = run.net->endowment(a, b);
    if (!e.has_value()) return true;
    auto drawn = run.endowment_drawn.find(make_edge(a, b));
    return (drawn == run.endowment_drawn.end() ? 0 : drawn->second) < *e;
}

bool materialize_pair(ProtocolRun& run, NodeId a, NodeId b) {
    if (!run.net->has_edge(a, b))
        throw SemanticError("NotNeighbors: no edge between " + std::to_string(a) + " and " +
                            std::to_string(b));
    const EdgeKey edge = make_edge(a, b);
    Endowment e = run.net->endowment(a, b);
    if (e.has_value() && run.endowment_drawn[edge] >= *e) return false;
    materialize_stock_unit(run, stock_key("[qq]", {a, b}));
    run.endowment_drawn[edge]++;
    return true;
}

TeleportResult teleport(ProtocolRun& run, NodeId src, int src_slot, NodeId dst) {
    const int src_wire = run.reg.wire_of(src, src_slot);
    ensure_logical(run, src_wire);
    const int logical = run.wire_logical[static_cast<std::size_t>(src_wire)];
    SpeciesKey key = stock_key("[qq]", {src, dst});
    if (run.reg.used_slots(dst) >= run.reg.slots(dst))
        throw SemanticError("NoFreeQubit: node " + std::to_string(dst) + " cannot hold the qubit");
    std::vector<int> unit = consume_unit(run, key, "NoSharedEntanglement");
    const int ws = unit_wire_for(key, unit, src);
    const int wd = unit_wire_for(key, unit, dst);

    int m1 = 0, m2 = 0;
    bell_measure(run, src, src_wire, ws, m1, m2);
    retire_wire(run, src, ws);
    retire_wire(run, src, src_wire);

    next_step(run);
    send_message(run, src, dst, "m1", ChannelKind::Classical, true);
    next_step(run);
    send_message(run, src, dst, "m2", ChannelKind::Classical, true);

    if (m2) run.state->apply_gate({Gate::X, wd, 0});
    if (m1) run.state->apply_gate({Gate::Z, wd, 0});
    next_step(run);
    local_event(run, dst, "pauli_correction", 1, OpClass::TypeI);
    const int dst_slot = promote_to_slot(run, dst, wd);

    run.logical_wire[static_cast<std::size_t>(logical)] = wd;
    if (static_cast<std::size_t>(wd) >= run.wire_logical.size())
        run.wire_logical.resize(static_cast<std::size_t>(wd) + 1, -1);
    run.wire_logical[static_cast<std::size_t>(wd)] = logical;

    run.achieved.push_back({channel_key("[q->q]", src, dst), 1});
    return {m1, m2, dst_slot, logical};
}

int superdense_send(ProtocolRun& run, NodeId src, NodeId dst, int bits, double noise_p) {
    if (bits < 0 || bits > 3) throw SemanticError("superdense message must be 2 bits");
    std::vector<int> unit =
        consume_unit(run, stock_key("[qq]", {src, dst}), "NoSharedEntanglement");
    SpeciesKey key = stock_key("[qq]", {src, dst});
    const int ws = unit_wire_for(key, unit, src);
    const int wd = unit_wire_for(key, unit, dst);
    const int b1 = (bits >> 1) & 1, b2 = bits & 1;

    if (b2) run.state->apply_gate({Gate::X, ws, 0});
    if (b1) run.state->apply_gate({Gate::Z, ws, 0});
    next_step(run);
    local_event(run, src, "dense_encode", 2, OpClass::TypeI);

    next_step(run);
    send_message(run, src, dst, "encoded_qubit", ChannelKind::Quantum, true, 1, noise_p > 0);
    apply_depolarizing(run, ws, noise_p);
    run.transient[src].erase(ws);
    run.transient[dst].insert(ws);

    run.state->apply_gate({Gate::CNOT, ws, wd});
    run.state->apply_gate({Gate::H, ws, 0});
    const int o1 = measure_and_reset(run, ws);
    const int o2 = measure_and_reset(run, wd);
    next_step(run);
    local_event(run, dst, "dense_decode", 2, OpClass::TypeI);
    retire_wire(run, dst, ws);
    retire_wire(run, dst, wd);

    run.achieved.push_back({channel_key("[c->c]", src, dst), 2});
    return (o1 << 1) | o2;
}

void entanglement_swap(ProtocolRun& run, NodeId mid, NodeId left, NodeId right) {
    SpeciesKey key_l = stock_key("[qq]", {left, mid});
    SpeciesKey key_r = stock_key("[qq]", {mid, right});
    std::vector<int> unit_l = consume_unit(run, key_l, "MissingPair");
    std::vector<int> unit_r = consume_unit(run, key_r, "MissingPair");
    const int wl = unit_wire_for(key_l, unit_l, left);
    const int wq1 = unit_wire_for(key_l, unit_l, mid);
    const int wq2 = unit_wire_for(key_r, unit_r, mid);
    const int wr = unit_wire_for(key_r, unit_r, right);

    int m1 = 0, m2 = 0;
    bell_measure(run, mid, wq1, wq2, m1, m2);
    retire_wire(run, mid, wq1);
    retire_wire(run, mid, wq2);

    next_step(run);
    send_message(run, mid, right, "m1", ChannelKind::Classical, true);
    next_step(run);
    send_message(run, mid, right, "m2", ChannelKind::Classical, true);

    if (m2) run.state->apply_gate({Gate::X, wr, 0});
    if (m1) run.state->apply_gate({Gate::Z, wr, 0});
    next_step(run);
    local_event(run, right, "pauli_correction", 1, OpClass::TypeI);

    SpeciesKey key_new = stock_key("[qq]", {left, right});
    EventId first = record_creation(run, key_new);
    std::vector<int> unit_new = {key_new.parties[0] == left ? wl : wr,
                                 key_new.parties[0] == left ? wr : wl};
    add_stock_unit(run, key_new, unit_new, first);
    run.achieved.push_back({key_new, 1});
}

void swap_chain(ProtocolRun& run, const std::vector<NodeId>& path, bool parallel) {
    if (path.size() < 3) throw SemanticError("swap chain needs at least three nodes");
    if (!parallel) {
        for (std::size_t i = 1; i + 1 < path.size(); ++i)
            entanglement_swap(run, path[i], path[0], path[i + 1]);
        return;
    }
    // halving rounds over disjoint middles
    std::vector<NodeId> active = path;
    while (active.size() > 2) {
        std::vector<NodeId> next;
        next.push_back(active[0]);
        std::size_t i = 1;
        while (i + 1 < active.size()) {
            entanglement_swap(run, active[i], active[i - 1], active[i + 1]);
            next.push_back(active[i + 1]);
            i += 2;
        }
        if (i + 1 == active.size()) next.push_back(active[i]);
        active = std::move(next);
        run.notes.push_back("parallel swap round completed");
    }
}

void distributed_cnot(ProtocolRun& run, NodeId control, NodeId target, int control_slot,
                      int target_slot) {
    const int cw = run.reg.wire_of(control, control_slot);
    const int tw = run.reg.wire_of(target, target_slot);
    SpeciesKey key = stock_key("[qq]", {control, target});
    std::vector<int> unit = consume_unit(run, key, "NoSharedEntanglement");
    const int ea = unit_wire_for(key, unit, control);
    const int eb = unit_wire_for(key, unit, target);

    run.state->apply_gate({Gate::CNOT, cw, ea});
    const int m1 = measure_and_reset(run, ea);
    next_step(run);
    local_event(run, control, "entangle_measure", 1, OpClass::TypeI);
    retire_wire(run, control, ea);

    next_step(run);
    send_message(run, control, target, "m1", ChannelKind::Classical, true);

    if (m1) run.state->apply_gate({Gate::X, eb, 0});
    run.state->apply_gate({Gate::CNOT, eb, tw});
    run.state->apply_gate({Gate::H, eb, 0});
    const int m2 = measure_and_reset(run, eb);
    next_step(run);
    local_event(run, target, "decode_measure", 1, OpClass::TypeI);
    retire_wire(run, target, eb);

    next_step(run);
    send_message(run, target, control, "m2", ChannelKind::Classical, true);

    if (m2) run.state->apply_gate({Gate::Z, cw, 0});
    next_step(run);
    local_event(run, control, "phase_correction", 1, OpClass::TypeI);

    run.achieved.push_back({SpeciesKey{"[cnot]", {control, target}, true}, 1});
}

void controlled_teleport_ghz(ProtocolRun& run, NodeId q, NodeId r, NodeId s, bool r_cooperates) {
    SpeciesKey key = stock_key("GHZ", {q, r, s});
    std::vector<int> unit = consume_unit(run, key, "MissingGHZ");
    const int gq = unit_wire_for(key, unit, q);
    const int gr = unit_wire_for(key, unit, r);
    const int gs = unit_wire_for(key, unit, s);
    const int q_wire = run.reg.wire_of(q, 0);
    ensure_logical(run, q_wire);
    const int logical = run.wire_logical[static_cast<std::size_t>(q_wire)];

    int m1 = 0, m2 = 0;
    bell_measure(run, q, q_wire, gq, m1, m2);
    retire_wire(run, q, gq);
    retire_wire(run, q, q_wire);

    next_step(run);
    send_message(run, q, r, "m1", ChannelKind::Classical, true);
    next_step(run);
    send_message(run, q, r, "m2", ChannelKind::Classical, true);

    run.state->apply_gate({Gate::H, gr, 0});
    const int m3 = measure_and_reset(run, gr);
    next_step(run);
    local_event(run, r, "x_basis_measurement", 1, OpClass::TypeI);
    retire_wire(run, r, gr);

    if (!r_cooperates) {
        run.notes.push_back("controller withheld cooperation: no correction applied at receiver");
        return;
    }

    next_step(run);
    send_message(run, r, s, "m2", ChannelKind::Classical, true);
    next_step(run);
    send_message(run, r, s, "m1^m3", ChannelKind::Classical, true);

    if (m2) run.state->apply_gate({Gate::X, gs, 0});
    if (m1 ^ m3) run.state->apply_gate({Gate::Z, gs, 0});
    next_step(run);
    local_event(run, s, "pauli_correction", 1, OpClass::TypeI);
    promote_to_slot(run, s, gs);

    run.logical_wire[static_cast<std::size_t>(logical)] = gs;
    if (static_cast<std::size_t>(gs) >= run.wire_logical.size())
        run.wire_logical.resize(static_cast<std::size_t>(gs) + 1, -1);
    run.wire_logical[static_cast<std::size_t>(gs)] = logical;

    run.achieved.push_back({channel_key("[q->q]", q, s), 1});
}

int shared_coin(ProtocolRun& run, NodeId a, NodeId b) {
    SpeciesKey key = stock_key("[qq]", {a, b});
    std::vector<int> unit = consume_unit(run, key, "NoSharedEntanglement");
    const int wa = unit_wire_for(key, unit, a);
    const int wb = unit_wire_for(key, unit, b);
    const int ma = measure_and_reset(run, wa);
    const int mb = measure_and_reset(run, wb);
    if (ma != mb) throw EngineError("shared coin halves disagree");
    next_step(run);
    local_event(run, a, "coin_measurement", 1, OpClass::TypeI);
    local_event(run, b, "coin_measurement", 1, OpClass::TypeI);
    retire_wire(run, a, wa);
    retire_wire(run, b, wb);
    run.achieved.push_back({stock_key("[cc]", {a, b}), 1});
    return ma;
}

CompileResult compile_neighbor_unitary(ProtocolRun& run, const LocalUnitary& u, NodeId a,
                                       NodeId b) {
    if (!run.net->has_edge(a, b))
        throw SemanticError("NotNeighbors: " + std::to_string(a) + " and " + std::to_string(b));
    const int na = run.reg.used_slots(a), nb = run.reg.used_slots(b);
    const int need = na + nb;
    if (run.net->capacity(a) < need || run.net->capacity(b) < need)
        throw SemanticError("CapacityExceeded: hosting needs capacity " + std::to_string(need) +
                            " (|P_i| + max neighbor block)");
    if (u.uses_matrix() && u.matrix.rows() != (Eigen::Index{1} << need))
        throw SemanticError("neighbor unitary dimension mismatch");

    // canonical qubit list: a's occupied slots ascending, then b's
    std::vector<int> logicals;
    for (NodeId node : {a, b})
        for (int slot : occupied_slots(run, node)) {
            int w = run.reg.wire_of(node, slot);
            ensure_logical(run, w);
            logicals.push_back(run.wire_logical[static_cast<std::size_t>(w)]);
        }

    CompileResult result;
    result.coin = shared_coin(run, a, b);
    result.host = result.coin == 0 ? a : b;
    result.guest = result.host == a ? b : a;

    for (int slot : occupied_slots(run, result.guest)) teleport(run, result.guest, slot, result.host);

    std::vector<int> wires;
    wires.reserve(logicals.size());
    for (int l : logicals) wires.push_back(run.logical_wire[static_cast<std::size_t>(l)]);
    run.state->apply_local(u, wires);
    next_step(run);
    local_event(run, result.host, "neighbor_unitary", need,
                u.clifford() || u.is_identity() ? OpClass::TypeI : OpClass::TypeII);

    // uniform selection of the qubits to send back
    const int k = result.guest == a ? na : nb;
    std::vector<int> idx(static_cast<std::size_t>(need));
    for (int i = 0; i < need; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
        int j = run.rng.uniform_int(i, need - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    result.returned.assign(idx.begin(), idx.begin() + k);
    std::sort(result.returned.begin(), result.returned.end());

    std::ostringstream sel;
    sel << "return_selection:";
    for (std::size_t i = 0; i < result.returned.size(); ++i) {
        if (i) sel << ",";
        sel << result.returned[i];
    }
    next_step(run);
    local_event(run, result.host, sel.str(), k, OpClass::TypeI);

    for (int i : result.returned) {
        const int logical = logicals[static_cast<std::size_t>(i)];
        const int w = run.logical_wire[static_cast<std::size_t>(logical)];
        teleport(run, result.host, run.reg.slot_of(result.host, w), result.guest);
    }
    run.reg.compact(a);
    run.reg.compact(b);
    return result;
}

void lu_transform(ProtocolRun& run, const std::map<NodeId, LocalUnitary>& per_node) {
    next_step(run);
    for (const auto& [node, u] : per_node) {
        std::vector<int> wires;
        for (int slot : occupied_slots(run, node)) wires.push_back(run.reg.wire_of(node, slot));
        run.state->apply_local(u, wires);
        local_event(run, node, "local_unitary", static_cast<long long>(wires.size()),
                    u.clifford() || u.is_identity() ? OpClass::TypeI : OpClass::TypeII);
    }
}

namespace {

void run_script(ProtocolRun& run, const Script& script, bool allow_sends) {
    std::map<NodeId, std::map<std::string, int>> env;
    for (const ScriptOp& op : script) {
        switch (op.kind) {
            case ScriptOp::Kind::Local: {
                bool fire = true;
                if (!op.bit.empty()) {
                    auto node_env = env.find(op.node);
                    if (node_env == env.end() || !node_env->second.contains(op.bit))
                        throw SemanticError("unknown condition bit " + op.bit + " at node " +
                                            std::to_string(op.node));
                    fire = node_env->second[op.bit] != 0;
                }
                next_step(run);
                if (fire) {
                    std::vector<int> wires;
                    for (int slot : op.slots) wires.push_back(run.reg.wire_of(op.node, slot));
                    run.state->apply_local(op.u, wires);
                }
                local_event(run, op.node, op.bit.empty() ? "local_op" : "conditional_op",
                            static_cast<long long>(op.slots.size()),
                            op.u.clifford() || op.u.is_identity() ? OpClass::TypeI : OpClass::TypeII);
                break;
            }
            case ScriptOp::Kind::MeasureZ: {
                if (op.slots.size() != 1) throw SemanticError("measure step takes one slot");
                const int wire = run.reg.wire_of(op.node, op.slots[0]);
                const int m = run.state->measure_z(wire, run.rng);
                env[op.node][op.out] = m;
                next_step(run);
                local_event(run, op.node, "measure_z", 1, OpClass::TypeI);
                break;
            }
            case ScriptOp::Kind::Send: {
                if (!allow_sends)
                    throw SemanticError("IllegalChannelUse: LU scripts permit no messages");
                if (op.channel != ChannelKind::Classical)
                    throw SemanticError("IllegalChannelUse: scripts may only send classical bits");
                auto node_env = env.find(op.node);
                if (node_env == env.end() || !node_env->second.contains(op.bit))
                    throw SemanticError("unknown bit " + op.bit + " at node " +
                                        std::to_string(op.node));
                next_step(run);
                send_message(run, op.node, op.to, op.bit, ChannelKind::Classical, true);
                env[op.to][op.bit] = node_env->second[op.bit];
                break;
            }
        }
    }
}

}  // namespace

void lu_script(ProtocolRun& run, const Script& script) { run_script(run, script, false); }

void locc_round(ProtocolRun& run, const Script& script) { run_script(run, script, true); }

void apply_depolarizing(ProtocolRun& run, int wire, double p) {
    if (p < 0 || p > 1) throw SemanticError("depolarizing probability must be in [0,1]");
    if (p == 0) return;
    if (run.rng.uniform() < p) {
        switch (run.rng.uniform_int(0, 3)) {
            case 1: run.state->apply_gate({Gate::X, wire, 0}); break;
            case 2: run.state->apply_gate({Gate::Y, wire, 0}); break;
            case 3: run.state->apply_gate({Gate::Z, wire, 0}); break;
            default: break;
        }
    }
}

ResourceInequality teleport_inequality(NodeId src, NodeId dst) {
    ResourceInequality ineq;
    ineq.consumed = {{stock_key("[qq]", {src, dst}), 1}, {channel_key("[c->c]", src, dst), 2}};
    ineq.produced = {{channel_key("[q->q]", src, dst), 1}};
    return ineq;
}

ResourceInequality superdense_inequality(NodeId src, NodeId dst) {
    ResourceInequality ineq;
    ineq.consumed = {{stock_key("[qq]", {src, dst}), 1}, {channel_key("[q->q]", src, dst), 1}};
    ineq.produced = {{channel_key("[c->c]", src, dst), 2}};
    return ineq;
}

ResourceInequality swap_inequality(NodeId mid, NodeId left, NodeId right) {
    ResourceInequality ineq;
    ineq.consumed = {{stock_key("[qq]", {left, mid}), 1},
                     {stock_key("[qq]", {mid, right}), 1},
                     {channel_key("[c->c]", mid, right), 2}};
    ineq.produced = {{stock_key("[qq]", {left, right}), 1}};
    return ineq;
}

ResourceInequality distributed_cnot_inequality(NodeId control, NodeId target) {
    ResourceInequality ineq;
    ineq.consumed = {{stock_key("[qq]", {control, target}), 1},
                     {channel_key("[c->c]", control, target), 1},
                     {channel_key("[c->c]", target, control), 1}};
    ineq.produced = {{SpeciesKey{"[cnot]", {control, target}, true}, 1}};
    return ineq;
}

ResourceInequality controlled_teleport_inequality(NodeId q, NodeId r, NodeId s) {
    ResourceInequality ineq;
    ineq.consumed = {{stock_key("GHZ", {q, r, s}), 1},
                     {channel_key("[c->c]", q, r), 2},
                     {channel_key("[c->c]", r, s), 2}};
    ineq.produced = {{channel_key("[q->q]", q, s), 1}};
    return ineq;
}

CVec state_in_logical_order(const ProtocolRun& run) {
    const PureState* ps = run.state->dense_state();
    if (!ps) throw EngineError("logical-order readout requires the dense engine");
    const int nl = static_cast<int>(run.logical_wire.size());
    const std::size_t dim = std::size_t{1} << nl;
    CVec out = CVec::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        std::size_t phys = 0;
        for (int l = 0; l < nl; ++l)
            if ((i >> l) & 1) phys |= std::size_t{1} << run.logical_wire[static_cast<std::size_t>(l)];
        out[static_cast<Eigen::Index>(i)] = ps->amps[static_cast<Eigen::Index>(phys)];
    }
    return out;
}

}  // namespace qnet
