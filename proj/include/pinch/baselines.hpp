#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/geometry.hpp"

namespace pinch {

/// Per-antenna importance scores at the policy boundary (pre-sigmoid logits
/// or probabilities; only the ordering matters here).
struct ImportanceScores {
    std::vector<double> scores;

    int size() const { return static_cast<int>(scores.size()); }
};

namespace detail {

// Indices of the k largest values, ties resolved toward the smaller index.
inline std::vector<int> top_k_indices(const std::vector<double>& values, int k) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
    });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

}  // namespace detail

/// Activates the k antennas nearest to the user; distance ties go to the
/// smaller index.
inline ActivationVector nearest_antennas(const AntennaLayout& layout, const UserPosition& user,
                                         int k) {
    const int n = layout.size();
    if (k < 1 || k > n) throw std::invalid_argument("nearest_antennas: k out of range");
    std::vector<double> neg_dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        neg_dist[static_cast<std::size_t>(i)] =
            -distance(user.vec(), layout.positions[static_cast<std::size_t>(i)]);
    auto chosen = detail::top_k_indices(neg_dist, k);
    ActivationVector a = ActivationVector::zeros(n);
    for (int i : chosen) a.bits[static_cast<std::size_t>(i)] = 1;
    return a;
}

/// Keeps the k highest-scoring antennas; ties go to the smaller index.
inline ActivationVector top_k_refine(const ImportanceScores& imp, int k) {
    const int n = imp.size();
    if (k < 1 || k > n) throw std::invalid_argument("top_k_refine: k out of range");
    for (double v : imp.scores)
        if (!std::isfinite(v)) throw std::invalid_argument("top_k_refine: non-finite score");
    auto chosen = detail::top_k_indices(imp.scores, k);
    ActivationVector a = ActivationVector::zeros(n);
    for (int i : chosen) a.bits[static_cast<std::size_t>(i)] = 1;
    return a;
}

}  // namespace pinch
