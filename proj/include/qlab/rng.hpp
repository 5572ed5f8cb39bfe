#pragma once

#include <cstdint>

namespace qlab {

// Counter-based generator built on the SplitMix64 finalizer.  Every draw is a
// pure function of (seed, stream, counter), so results are identical across
// platforms and independent of evaluation order between streams.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))), counter_(0) {}

    std::uint64_t next_u64() {
        ++counter_;
        return mix(base_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Index into a discrete distribution given by probabilities p[0..n-1]
    // summing to ~1.  Falls back to the last index on accumulated rounding.
    template <typename Vec>
    int categorical(const Vec& p) {
        const double u = next_double();
        double acc = 0.0;
        const int n = static_cast<int>(p.size());
        for (int i = 0; i < n; ++i) {
            acc += p[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t base_;
    std::uint64_t counter_;
};

} // namespace qlab
