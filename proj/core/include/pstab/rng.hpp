#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace pstab {

/// Counter-based generator (splitmix64 finalizer over key + counter·golden).
/// Every draw is a pure integer function of (seed, stream, counter), so runs
/// reproduce bitwise across platforms and trajectories can be keyed
/// independently as (seed, trajectory-index) without sharing state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed) ^ (mix(stream + 0x632BE59BD9B4E019ULL)))) {}

    std::uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ULL;
        return mix(key_ + counter_);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform over {0, 1, ..., bound_inclusive}.
    std::uint64_t uniform_uint(std::uint64_t bound_inclusive) {
        const std::uint64_t n = bound_inclusive + 1;
        if (n == 0) return next_u64();  // full range
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n) - 1;
        std::uint64_t r = next_u64();
        while (r > limit) r = next_u64();
        return r % n;
    }

    /// Index drawn according to `weights` (nonnegative, summing to ~1).
    std::size_t categorical(std::span<const double> weights) {
        if (weights.empty()) {
            throw std::invalid_argument("CounterRng::categorical: empty weights");
        }
        const double u = uniform();
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            acc += weights[i];
            if (u < acc) return i;
        }
        return last_positive;  // guards against rounding in the cumulative sum
    }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace pstab
