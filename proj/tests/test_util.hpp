#pragma once

// Shared helpers for the unit suites: seeded random instances and the
// exhaustive reference oracles the solvers are checked against. The oracles
// deliberately share no code with the solver implementations.

#include <complex>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/config.hpp"
#include "pinch/geometry.hpp"
#include "pinch/rng.hpp"

namespace testutil {

inline pinch::UserPosition random_user(const pinch::SystemConfig& cfg, const pinch::CounterRng& rng,
                                       std::uint64_t instance) {
    const auto stream = rng.derive(instance);
    const double l = cfg.region_half_side_m;
    return {stream.uniform(0, -l, l), stream.uniform(1, -l, l), stream.uniform(2, 0.0, 1.0)};
}

/// Synthetic channel with magnitudes in [0.1, 1.1) and free phases; exercises
/// the solvers away from the physical geometry.
inline pinch::ChannelVector random_channel(int n, const pinch::CounterRng& rng,
                                           std::uint64_t instance) {
    const auto stream = rng.derive(instance);
    std::vector<std::complex<double>> gains;
    gains.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double mag = 0.1 + stream.uniform01(2 * static_cast<std::uint64_t>(i));
        const double ph = stream.uniform(2 * static_cast<std::uint64_t>(i) + 1, -pinch::kPi, pinch::kPi);
        gains.push_back(std::polar(mag, ph));
    }
    return pinch::ChannelVector(std::move(gains));
}

/// Exhaustive reference for max over nonempty a of |a^T B|^2 / N_a.
inline double oracle_max_ratio(const pinch::ChannelVector& b) {
    const int n = b.size();
    double best = -1.0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::complex<double> s{0.0, 0.0};
        int k = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                s += b[i];
                ++k;
            }
        best = std::max(best, std::norm(s) / k);
    }
    return best;
}

/// Exhaustive reference for max over all a (empty included) of
/// |a^T B|^2 - lambda * N_a.
inline double oracle_subproblem_value(const pinch::ChannelVector& b, double lambda) {
    const int n = b.size();
    double best = 0.0;  // empty set
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::complex<double> s{0.0, 0.0};
        int k = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                s += b[i];
                ++k;
            }
        best = std::max(best, std::norm(s) - lambda * k);
    }
    return best;
}

}  // namespace testutil
