#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pinch/common.hpp"

namespace pinch {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Counter-based random stream. A stream is identified by a key built from
/// (seed, tags...); the n-th draw is a pure function of (key, n), so draws
/// can be evaluated in any order or in parallel and always reproduce.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(detail::splitmix64(seed)) {}

    /// Derives an independent substream, e.g. per purpose or per instance.
    CounterRng derive(std::uint64_t tag) const {
        CounterRng r(*this);
        r.key_ = detail::splitmix64(key_ ^ detail::splitmix64(tag + 0x51ED2701ull));
        return r;
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return detail::splitmix64(key_ ^ detail::splitmix64(counter));
    }

    /// Uniform draw in [0, 1).
    double uniform01(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform draw in (0, 1]; safe under log().
    double uniform01_open(std::uint64_t counter) const {
        return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(std::uint64_t counter, double lo, double hi) const {
        return lo + (hi - lo) * uniform01(counter);
    }

    /// Standard normal via Box-Muller; consumes counters 2n and 2n+1.
    double gaussian(std::uint64_t counter) const {
        double u1 = uniform01_open(2 * counter);
        double u2 = uniform01(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t index(std::uint64_t counter, std::uint64_t n) const {
        // 128-bit multiply-shift keeps the map unbiased enough for n << 2^64.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(bits(counter)) * n) >> 64);
    }

    /// Deterministic Fisher-Yates permutation of 0..n-1.
    std::vector<std::uint32_t> permutation(std::uint32_t n) const {
        std::vector<std::uint32_t> p(n);
        for (std::uint32_t i = 0; i < n; ++i) p[i] = i;
        for (std::uint32_t i = n; i > 1; --i) {
            auto j = static_cast<std::uint32_t>(index(i, i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

// Stream tags; keep stable, they are part of the reproducibility contract.
namespace rng_stream {
inline constexpr std::uint64_t kDatasetUser = 1;
inline constexpr std::uint64_t kWeightInit = 2;
inline constexpr std::uint64_t kBatchShuffle = 3;
inline constexpr std::uint64_t kPositionNoise = 4;
inline constexpr std::uint64_t kBenchUsers = 5;
}  // namespace rng_stream

}  // namespace pinch
