#pragma once

#include <cstdint>
#include <vector>

#include "qnet/gates.hpp"
#include "qnet/rng.hpp"

namespace qnet {

inline constexpr int kMaxTableauQubits = 4096;

// CHP-style tableau over GF(2): n destabilizer rows, n stabilizer rows, one
// scratch row, bit-packed. Columns are preallocated up to a fixed capacity so
// wires can be appended cheaply during protocol execution.
class StabilizerTableau {
  public:
    explicit StabilizerTableau(int n, int capacity = -1);

    int qubits() const { return n_; }
    int capacity() const { return cap_; }

    // activates one preallocated wire in |0>, returns its index
    int add_qubit();

    void apply(const GateOp& op);
    void apply(const GateList& ops);
    void h(int q);
    void s(int q);
    void x(int q);
    void y(int q);
    void z(int q);
    void cnot(int c, int t);
    void cz(int a, int b);
    void swap(int a, int b);

    int measure_z(int q, RngStream& rng);
    bool measurement_deterministic(int q) const;

    // S(A) = rank of the stabilizer generators restricted to A, minus |A|.
    // Exact integer.
    int subset_entropy(const std::vector<int>& a) const;
    int mutual_information(const std::vector<int>& a, const std::vector<int>& b) const;

    // ||rho_A - I/d||_1 for a stabilizer reduced state: 2(1 - 2^{S(A)-|A|})
    double deviation_from_uniform(const std::vector<int>& a) const;

    // invariant checks used by tests
    bool rows_commute() const;
    bool full_rank() const;

    // sign bit and packed pauli row accessors for cross-checks
    bool stabilizer_phase(int row) const;

  private:
    int words() const { return words_; }
    std::uint64_t* row_x(int r) { return data_.data() + static_cast<std::size_t>(r) * 2 * words_; }
    std::uint64_t* row_z(int r) { return row_x(r) + words_; }
    const std::uint64_t* row_x(int r) const { return data_.data() + static_cast<std::size_t>(r) * 2 * words_; }
    const std::uint64_t* row_z(int r) const { return row_x(r) + words_; }

    bool get(const std::uint64_t* bits, int q) const { return (bits[q >> 6] >> (q & 63)) & 1; }
    void flip(std::uint64_t* bits, int q) { bits[q >> 6] ^= std::uint64_t{1} << (q & 63); }
    void set(std::uint64_t* bits, int q, bool v) {
        if (get(bits, q) != v) flip(bits, q);
    }

    void row_mult(int into, int from);  // row_into *= row_from with phase tracking
    void row_copy(int into, int from);
    void row_clear(int r);
    int row_mult_phase(int into, int from) const;

    int n_;
    int cap_;
    int words_;
    std::vector<std::uint64_t> data_;  // (2*cap+1) rows, each 2*words_
    std::vector<std::uint8_t> phase_;  // one bit per row
};

// Uniform sample from the 11520-element two-qubit Clifford group as a gate
// word over {H, S, CNOT} on wires (0, 1); remap qubits at the call site.
GateList random_two_qubit_clifford(RngStream& rng);

// number of distinct two-qubit Clifford actions (enumerated once, cached)
int two_qubit_clifford_count();

// canonical 20-bit code of a gate word's conjugation action (test oracle)
std::uint32_t two_qubit_clifford_code(const GateList& gates);

}  // namespace qnet
