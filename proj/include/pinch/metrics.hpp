#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pinch/baselines.hpp"
#include "pinch/channel.hpp"
#include "pinch/dataset.hpp"
#include "pinch/parallel.hpp"

namespace pinch {

struct Metrics {
    double snr_accuracy = 0.0;        // mean gamma(a_hat) / gamma*
    double rate_accuracy = 0.0;       // mean R(a_hat) / R*
    double bitwise_accuracy = 0.0;    // mean fraction of matching bits
    double activation_ratio_model = 0.0;
    double activation_ratio_optimal = 0.0;
    int n_instances = 0;
    int fallback_count = 0;  // empty predictions resolved to the argmax antenna
};

struct PerInstanceEval {
    double snr_ratio = 0.0;
    double rate_ratio = 0.0;
    double bitwise = 0.0;
    int n_active_model = 0;
    int n_active_optimal = 0;
    bool used_fallback = false;
};

/// Probability vector for an instance; implementations wrap a policy, a
/// heuristic, or the labels themselves.
using ProbabilityPolicy = std::function<std::vector<double>(const InstanceRecord&)>;

/// Thresholds probabilities into an activation; an empty result falls back to
/// the single highest-probability antenna so the SNR is always defined.
inline ActivationVector threshold_activation(const std::vector<double>& probs, double threshold,
                                             bool* used_fallback = nullptr) {
    ActivationVector a = ActivationVector::zeros(static_cast<int>(probs.size()));
    for (std::size_t i = 0; i < probs.size(); ++i) a.bits[i] = probs[i] > threshold ? 1 : 0;
    if (used_fallback) *used_fallback = false;
    if (a.n_active() == 0) {
        const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
        a.bits[static_cast<std::size_t>(best)] = 1;
        if (used_fallback) *used_fallback = true;
    }
    return a;
}

inline PerInstanceEval evaluate_instance(const SystemConfig& cfg, const InstanceRecord& rec,
                                         const std::vector<double>& probs, double threshold) {
    if (probs.size() != rec.magnitudes.size())
        throw std::invalid_argument("evaluate: policy output length mismatch");
    PerInstanceEval ev;
    ActivationVector a = threshold_activation(probs, threshold, &ev.used_fallback);

    const ChannelVector ch = rec.channel();
    const double snr = evaluate_snr(cfg, ch, a);
    ev.snr_ratio = snr / rec.optimal_snr;
    ev.rate_ratio = achievable_rate(snr) / rec.optimal_rate;

    int matches = 0;
    for (int i = 0; i < a.size(); ++i)
        matches += a.bits[static_cast<std::size_t>(i)] ==
                   rec.optimal_activation.bits[static_cast<std::size_t>(i)];
    ev.bitwise = static_cast<double>(matches) / a.size();
    ev.n_active_model = a.n_active();
    ev.n_active_optimal = rec.optimal_activation.n_active();
    return ev;
}

inline Metrics evaluate(const ProbabilityPolicy& policy, const Dataset& ds,
                        double threshold = 0.5, int threads = 0,
                        std::vector<PerInstanceEval>* per_instance = nullptr) {
    if (ds.records.empty()) throw std::invalid_argument("evaluate: empty dataset");
    const int n = ds.size();
    std::vector<PerInstanceEval> evals(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const auto& rec = ds.records[static_cast<std::size_t>(i)];
        evals[static_cast<std::size_t>(i)] =
            evaluate_instance(ds.config, rec, policy(rec), threshold);
    });

    Metrics m;
    m.n_instances = n;
    const int antennas = ds.config.n_antennas;
    for (const auto& ev : evals) {
        m.snr_accuracy += ev.snr_ratio;
        m.rate_accuracy += ev.rate_ratio;
        m.bitwise_accuracy += ev.bitwise;
        m.activation_ratio_model += static_cast<double>(ev.n_active_model) / antennas;
        m.activation_ratio_optimal += static_cast<double>(ev.n_active_optimal) / antennas;
        m.fallback_count += ev.used_fallback ? 1 : 0;
    }
    m.snr_accuracy /= n;
    m.rate_accuracy /= n;
    m.bitwise_accuracy /= n;
    m.activation_ratio_model /= n;
    m.activation_ratio_optimal /= n;
    if (per_instance) *per_instance = std::move(evals);
    return m;
}

/// The labels replayed as a policy; evaluates to 1.0 on every metric.
inline ProbabilityPolicy label_policy() {
    return [](const InstanceRecord& rec) {
        std::vector<double> p(rec.optimal_activation.bits.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = rec.optimal_activation.bits[i] ? 1.0 : 0.0;
        return p;
    };
}

/// Nearest-antenna heuristic at a per-instance cardinality. The cardinality
/// source is the label by default (matched cardinality); a model-derived
/// count can be supplied instead.
inline ProbabilityPolicy nearest_policy(const SystemConfig& cfg,
                                        std::function<int(const InstanceRecord&)> cardinality = {}) {
    const auto layout = antenna_positions(cfg);
    if (!cardinality)
        cardinality = [](const InstanceRecord& rec) {
            return std::max(1, rec.optimal_activation.n_active());
        };
    return [layout, cardinality](const InstanceRecord& rec) {
        const int k = std::clamp(cardinality(rec), 1, layout.size());
        auto a = nearest_antennas(layout, rec.user, k);
        std::vector<double> p(a.bits.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = a.bits[i] ? 1.0 : 0.0;
        return p;
    };
}

}  // namespace pinch
