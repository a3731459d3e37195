#include "qnet/stabilizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>

#include "qnet/errors.hpp"

namespace qnet {

std::string gate_name(Gate g) {
    switch (g) {
        case Gate::H: return "H";
        case Gate::S: return "S";
        case Gate::X: return "X";
        case Gate::Y: return "Y";
        case Gate::Z: return "Z";
        case Gate::CNOT: return "CNOT";
        case Gate::CZ: return "CZ";
        case Gate::SWAP: return "SWAP";
        case Gate::T: return "T";
    }
    return "?";
}

StabilizerTableau::StabilizerTableau(int n, int capacity) : n_(n) {
    if (n < 1) throw EngineError("tableau needs n >= 1");
    cap_ = capacity < 0 ? n : capacity;
    if (cap_ < n) throw EngineError("tableau capacity below qubit count");
    if (cap_ > kMaxTableauQubits) throw EngineError("tableau cap exceeded: " + std::to_string(cap_));
    words_ = (cap_ + 63) / 64;
    data_.assign(static_cast<std::size_t>(2 * cap_ + 1) * 2 * words_, 0);
    phase_.assign(2 * cap_ + 1, 0);
    for (int i = 0; i < cap_; ++i) {
        flip(row_x(i), i);           // destabilizer X_i
        flip(row_z(cap_ + i), i);    // stabilizer Z_i
    }
}

int StabilizerTableau::add_qubit() {
    if (n_ >= cap_) throw EngineError("tableau capacity exhausted");
    return n_++;
}

void StabilizerTableau::h(int q) {
    auto upd = [&](int r) {
        bool xq = get(row_x(r), q), zq = get(row_z(r), q);
        phase_[r] ^= static_cast<std::uint8_t>(xq && zq);
        set(row_x(r), q, zq);
        set(row_z(r), q, xq);
    };
    for (int i = 0; i < n_; ++i) upd(i);
    for (int i = 0; i < n_; ++i) upd(cap_ + i);
}

void StabilizerTableau::s(int q) {
    auto upd = [&](int r) {
        bool xq = get(row_x(r), q), zq = get(row_z(r), q);
        phase_[r] ^= static_cast<std::uint8_t>(xq && zq);
        set(row_z(r), q, zq ^ xq);
    };
    for (int i = 0; i < n_; ++i) upd(i);
    for (int i = 0; i < n_; ++i) upd(cap_ + i);
}

void StabilizerTableau::x(int q) {
    for (int i = 0; i < n_; ++i) phase_[i] ^= static_cast<std::uint8_t>(get(row_z(i), q));
    for (int i = 0; i < n_; ++i) phase_[cap_ + i] ^= static_cast<std::uint8_t>(get(row_z(cap_ + i), q));
}

void StabilizerTableau::y(int q) {
    auto upd = [&](int r) { phase_[r] ^= static_cast<std::uint8_t>(get(row_x(r), q) ^ get(row_z(r), q)); };
    for (int i = 0; i < n_; ++i) upd(i);
    for (int i = 0; i < n_; ++i) upd(cap_ + i);
}

void StabilizerTableau::z(int q) {
    for (int i = 0; i < n_; ++i) phase_[i] ^= static_cast<std::uint8_t>(get(row_x(i), q));
    for (int i = 0; i < n_; ++i) phase_[cap_ + i] ^= static_cast<std::uint8_t>(get(row_x(cap_ + i), q));
}

void StabilizerTableau::cnot(int c, int t) {
    if (c == t) throw EngineError("cnot control equals target");
    auto upd = [&](int r) {
        bool xc = get(row_x(r), c), zc = get(row_z(r), c);
        bool xt = get(row_x(r), t), zt = get(row_z(r), t);
        phase_[r] ^= static_cast<std::uint8_t>(xc && zt && (xt == zc));
        set(row_x(r), t, xt ^ xc);
        set(row_z(r), c, zc ^ zt);
    };
    for (int i = 0; i < n_; ++i) upd(i);
    for (int i = 0; i < n_; ++i) upd(cap_ + i);
}

void StabilizerTableau::cz(int a, int b) {
    h(b);
    cnot(a, b);
    h(b);
}

void StabilizerTableau::swap(int a, int b) {
    if (a == b) return;
    auto upd = [&](int r) {
        bool xa = get(row_x(r), a), za = get(row_z(r), a);
        bool xb = get(row_x(r), b), zb = get(row_z(r), b);
        set(row_x(r), a, xb);
        set(row_x(r), b, xa);
        set(row_z(r), a, zb);
        set(row_z(r), b, za);
    };
    for (int i = 0; i < n_; ++i) upd(i);
    for (int i = 0; i < n_; ++i) upd(cap_ + i);
}

void StabilizerTableau::apply(const GateOp& op) {
    switch (op.g) {
        case Gate::H: h(op.q0); break;
        case Gate::S: s(op.q0); break;
        case Gate::X: x(op.q0); break;
        case Gate::Y: y(op.q0); break;
        case Gate::Z: z(op.q0); break;
        case Gate::CNOT: cnot(op.q0, op.q1); break;
        case Gate::CZ: cz(op.q0, op.q1); break;
        case Gate::SWAP: swap(op.q0, op.q1); break;
        case Gate::T: throw EngineError("T gate is not a Clifford operation");
    }
}

void StabilizerTableau::apply(const GateList& ops) {
    for (const GateOp& op : ops) apply(op);
}

int StabilizerTableau::row_mult_phase(int into, int from) const {
    // sum over columns of the i-exponent contributions, mod 4
    int pos = 0, neg = 0;
    for (int w = 0; w < words_; ++w) {
        std::uint64_t x1 = row_x(from)[w], z1 = row_z(from)[w];
        std::uint64_t x2 = row_x(into)[w], z2 = row_z(into)[w];
        std::uint64_t from_y = x1 & z1, from_x = x1 & ~z1, from_z = ~x1 & z1;
        std::uint64_t p = (from_y & z2 & ~x2) | (from_x & z2 & x2) | (from_z & x2 & ~z2);
        std::uint64_t n = (from_y & x2 & ~z2) | (from_x & z2 & ~x2) | (from_z & x2 & z2);
        pos += std::popcount(p);
        neg += std::popcount(n);
    }
    int total = (2 * phase_[into] + 2 * phase_[from] + pos - neg) % 4;
    if (total < 0) total += 4;
    return total;  // always 0 or 2 for commuting products
}

void StabilizerTableau::row_mult(int into, int from) {
    int total = row_mult_phase(into, from);
    phase_[into] = static_cast<std::uint8_t>(total / 2);
    for (int w = 0; w < words_; ++w) {
        row_x(into)[w] ^= row_x(from)[w];
        row_z(into)[w] ^= row_z(from)[w];
    }
}

void StabilizerTableau::row_copy(int into, int from) {
    phase_[into] = phase_[from];
    for (int w = 0; w < words_; ++w) {
        row_x(into)[w] = row_x(from)[w];
        row_z(into)[w] = row_z(from)[w];
    }
}

void StabilizerTableau::row_clear(int r) {
    phase_[r] = 0;
    for (int w = 0; w < words_; ++w) {
        row_x(r)[w] = 0;
        row_z(r)[w] = 0;
    }
}

bool StabilizerTableau::measurement_deterministic(int q) const {
    if (q < 0 || q >= n_) throw EngineError("BadIndex: wire out of range");
    for (int i = 0; i < n_; ++i)
        if (get(row_x(cap_ + i), q)) return false;
    return true;
}

int StabilizerTableau::measure_z(int q, RngStream& rng) {
    if (q < 0 || q >= n_) throw EngineError("BadIndex: measure wire out of range");
    int p = -1;
    for (int i = 0; i < n_; ++i)
        if (get(row_x(cap_ + i), q)) {
            p = i;
            break;
        }
    if (p >= 0) {
        // outcome is random
        for (int i = 0; i < n_; ++i) {
            if (i != p && get(row_x(cap_ + i), q)) row_mult(cap_ + i, cap_ + p);
            if (get(row_x(i), q)) row_mult(i, cap_ + p);
        }
        row_copy(p, cap_ + p);
        row_clear(cap_ + p);
        flip(row_z(cap_ + p), q);
        int outcome = static_cast<int>(rng.next_u64() & 1);
        phase_[cap_ + p] = static_cast<std::uint8_t>(outcome);
        return outcome;
    }
    // deterministic: accumulate into the scratch row
    const int scratch = 2 * cap_;
    row_clear(scratch);
    for (int i = 0; i < n_; ++i)
        if (get(row_x(i), q)) row_mult(scratch, cap_ + i);
    return phase_[scratch];
}

int StabilizerTableau::subset_entropy(const std::vector<int>& a) const {
    if (a.empty()) return 0;
    for (int q : a)
        if (q < 0 || q >= n_) throw EngineError("BadIndex: entropy subset out of range");
    const int k = static_cast<int>(a.size());
    const int cols = 2 * k;
    const int cwords = (cols + 63) / 64;
    std::vector<std::uint64_t> m(static_cast<std::size_t>(n_) * cwords, 0);
    for (int i = 0; i < n_; ++i) {
        const int r = cap_ + i;
        for (int j = 0; j < k; ++j) {
            if (get(row_x(r), a[j])) m[static_cast<std::size_t>(i) * cwords + (j >> 6)] |= std::uint64_t{1} << (j & 63);
            int jz = k + j;
            if (get(row_z(r), a[j]))
                m[static_cast<std::size_t>(i) * cwords + (jz >> 6)] |= std::uint64_t{1} << (jz & 63);
        }
    }
    // GF(2) rank
    int rank = 0;
    for (int col = 0; col < cols && rank < n_; ++col) {
        const int w = col >> 6;
        const std::uint64_t bit = std::uint64_t{1} << (col & 63);
        int pivot = -1;
        for (int i = rank; i < n_; ++i)
            if (m[static_cast<std::size_t>(i) * cwords + w] & bit) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        for (int ww = 0; ww < cwords; ++ww)
            std::swap(m[static_cast<std::size_t>(rank) * cwords + ww], m[static_cast<std::size_t>(pivot) * cwords + ww]);
        for (int i = 0; i < n_; ++i)
            if (i != rank && (m[static_cast<std::size_t>(i) * cwords + w] & bit))
                for (int ww = 0; ww < cwords; ++ww)
                    m[static_cast<std::size_t>(i) * cwords + ww] ^= m[static_cast<std::size_t>(rank) * cwords + ww];
        ++rank;
    }
    return rank - k;
}

int StabilizerTableau::mutual_information(const std::vector<int>& a, const std::vector<int>& b) const {
    for (int q : a)
        if (std::find(b.begin(), b.end(), q) != b.end())
            throw EngineError("OverlappingSubsets: mutual information needs disjoint sets");
    std::vector<int> joint = a;
    joint.insert(joint.end(), b.begin(), b.end());
    return subset_entropy(a) + subset_entropy(b) - subset_entropy(joint);
}

double StabilizerTableau::deviation_from_uniform(const std::vector<int>& a) const {
    const int s = subset_entropy(a);
    const int k = static_cast<int>(a.size());
    return 2.0 * (1.0 - std::exp2(static_cast<double>(s - k)));
}

bool StabilizerTableau::rows_commute() const {
    // stabilizer rows must commute pairwise: symplectic product zero
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
            int sym = 0;
            for (int w = 0; w < words_; ++w) {
                std::uint64_t v = (row_x(cap_ + i)[w] & row_z(cap_ + j)[w]) ^ (row_z(cap_ + i)[w] & row_x(cap_ + j)[w]);
                sym ^= std::popcount(v) & 1;
            }
            if (sym) return false;
        }
    return true;
}

bool StabilizerTableau::full_rank() const {
    std::vector<int> all(n_);
    for (int i = 0; i < n_; ++i) all[i] = i;
    return subset_entropy(all) == 0;  // rank n over 2n columns
}

bool StabilizerTableau::stabilizer_phase(int row) const { return phase_[cap_ + row]; }

namespace {

// conjugation action of a two-qubit Clifford word: images of X0, Z0, X1, Z1
struct Pauli4 {
    bool x0, z0, x1, z1, sign;
};

void conj_h(Pauli4& p, int q) {
    bool& xq = q == 0 ? p.x0 : p.x1;
    bool& zq = q == 0 ? p.z0 : p.z1;
    p.sign ^= xq && zq;
    std::swap(xq, zq);
}

void conj_s(Pauli4& p, int q) {
    bool& xq = q == 0 ? p.x0 : p.x1;
    bool& zq = q == 0 ? p.z0 : p.z1;
    p.sign ^= xq && zq;
    zq ^= xq;
}

void conj_cnot(Pauli4& p, int c) {
    bool& xc = c == 0 ? p.x0 : p.x1;
    bool& zc = c == 0 ? p.z0 : p.z1;
    bool& xt = c == 0 ? p.x1 : p.x0;
    bool& zt = c == 0 ? p.z1 : p.z0;
    p.sign ^= xc && zt && (xt == zc);
    xt ^= xc;
    zc ^= zt;
}

struct C2Element {
    Pauli4 im[4];  // X0, Z0, X1, Z1
};

C2Element c2_identity() {
    C2Element e{};
    e.im[0] = {true, false, false, false, false};
    e.im[1] = {false, true, false, false, false};
    e.im[2] = {false, false, true, false, false};
    e.im[3] = {false, false, false, true, false};
    return e;
}

void c2_apply(C2Element& e, const GateOp& g) {
    for (Pauli4& p : e.im) {
        switch (g.g) {
            case Gate::H: conj_h(p, g.q0); break;
            case Gate::S: conj_s(p, g.q0); break;
            case Gate::CNOT: conj_cnot(p, g.q0); break;
            default: throw EngineError("unexpected generator in C2 enumeration");
        }
    }
}

std::uint32_t c2_code(const C2Element& e) {
    std::uint32_t code = 0;
    for (int i = 0; i < 4; ++i) {
        const Pauli4& p = e.im[i];
        std::uint32_t v = (p.x0 ? 1u : 0u) | (p.z0 ? 2u : 0u) | (p.x1 ? 4u : 0u) | (p.z1 ? 8u : 0u) |
                          (p.sign ? 16u : 0u);
        code |= v << (5 * i);
    }
    return code;
}

const std::vector<GateList>& c2_table() {
    static const std::vector<GateList> table = [] {
        const GateOp generators[] = {
            {Gate::H, 0, 0}, {Gate::H, 1, 0}, {Gate::S, 0, 0},
            {Gate::S, 1, 0}, {Gate::CNOT, 0, 1}, {Gate::CNOT, 1, 0},
        };
        std::map<std::uint32_t, GateList> seen;
        std::deque<std::pair<C2Element, GateList>> queue;
        C2Element id = c2_identity();
        seen[c2_code(id)] = {};
        queue.emplace_back(id, GateList{});
        while (!queue.empty()) {
            auto [el, word] = queue.front();
            queue.pop_front();
            for (const GateOp& g : generators) {
                C2Element next = el;
                c2_apply(next, g);
                std::uint32_t code = c2_code(next);
                if (seen.contains(code)) continue;
                GateList next_word = word;
                next_word.push_back(g);
                seen[code] = next_word;
                queue.emplace_back(next, std::move(next_word));
            }
        }
        std::vector<GateList> out;
        out.reserve(seen.size());
        for (auto& [_, word] : seen) out.push_back(std::move(word));
        return out;
    }();
    return table;
}

}  // namespace

GateList random_two_qubit_clifford(RngStream& rng) {
    const auto& table = c2_table();
    return table[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(table.size()) - 1))];
}

int two_qubit_clifford_count() { return static_cast<int>(c2_table().size()); }

std::uint32_t two_qubit_clifford_code(const GateList& gates) {
    C2Element e = c2_identity();
    for (const GateOp& g : gates) c2_apply(e, g);
    return c2_code(e);
}

}  // namespace qnet
