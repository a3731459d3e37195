#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace qnet {

// Seedable, splittable random stream. Every stochastic operation draws from
// an explicitly passed stream, so runs replay exactly from (seed, stream id).
// Child streams are derived by hashing (root, stream, child), never by
// sharing generator state: trial i sees the same stream regardless of
// scheduling.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : root_(seed), stream_(stream), gen_(mix(seed, stream)) {}

    RngStream split(std::uint64_t child) const { return RngStream(root_, mix(stream_, child + 1)); }

    std::uint64_t next_u64() { return gen_(); }

    double uniform() {
        // 53-bit mantissa in [0,1)
        return (gen_() >> 11) * 0x1.0p-53;
    }

    // inclusive range
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::complex<double> normal_complex() { return {normal(), normal()}; }

  private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over the combined word
        std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t bounded(std::uint64_t n) {
        // rejection sampling, no modulo bias
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    std::uint64_t root_;
    std::uint64_t stream_;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace qnet
