#pragma once

// Monte Carlo inference under user-location uncertainty: sample noisy
// position estimates, run the policy on each, average the probabilities and
// threshold (the mean activation policy). The comparison baseline gives the
// exact solver a single noisy draw.

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/dataset.hpp"
#include "pinch/metrics.hpp"
#include "pinch/models.hpp"
#include "pinch/parallel.hpp"
#include "pinch/rng.hpp"
#include "pinch/solver.hpp"

namespace pinch {

struct UncertaintyConfig {
    double sigma_p = 0.0;   // std of the isotropic Gaussian position error, meters
    int n_samples = 32;     // M
    double threshold = 0.5;
    std::uint64_t seed = 1;
    bool planar_noise = false;  // restrict the error to the ground plane

    void validate() const {
        if (!(sigma_p >= 0)) throw std::invalid_argument("uncertainty: sigma_p must be >= 0");
        if (n_samples < 1) throw std::invalid_argument("uncertainty: n_samples must be >= 1");
    }
};

/// M noisy position estimates around the true position. The height is clamped
/// to [0, H - 0.01] so the geometry stays valid; x and y may leave the region
/// since the channel remains computable there.
inline std::vector<UserPosition> sample_noisy_positions(const UserPosition& user,
                                                        const SystemConfig& sys,
                                                        const UncertaintyConfig& cfg,
                                                        std::uint64_t instance_tag = 0) {
    cfg.validate();
    const auto stream =
        CounterRng(cfg.seed).derive(rng_stream::kPositionNoise).derive(instance_tag);
    const double z_max = sys.antenna_height_m - 0.01;
    std::vector<UserPosition> out;
    out.reserve(static_cast<std::size_t>(cfg.n_samples));
    for (int i = 0; i < cfg.n_samples; ++i) {
        const auto c = static_cast<std::uint64_t>(i);
        UserPosition p = user;
        p.x += cfg.sigma_p * stream.gaussian(3 * c);
        p.y += cfg.sigma_p * stream.gaussian(3 * c + 1);
        if (!cfg.planar_noise) p.z += cfg.sigma_p * stream.gaussian(3 * c + 2);
        p.z = std::clamp(p.z, 0.0, z_max);
        out.push_back(p);
    }
    return out;
}

/// Element-wise mean of the probability vectors, thresholded strictly; an
/// empty decision falls back to the argmax antenna.
inline ActivationVector mean_activation_policy(const std::vector<std::vector<double>>& probs,
                                               double threshold = 0.5,
                                               bool* used_fallback = nullptr) {
    if (probs.empty()) throw std::invalid_argument("mean activation: no samples");
    const std::size_t n = probs[0].size();
    std::vector<double> mean(n, 0.0);
    for (const auto& p : probs) {
        if (p.size() != n) throw std::invalid_argument("mean activation: length mismatch");
        for (std::size_t j = 0; j < n; ++j) {
            if (p[j] < 0.0 || p[j] > 1.0)
                throw std::invalid_argument("mean activation: probability out of [0,1]");
            mean[j] += p[j];
        }
    }
    for (double& v : mean) v /= static_cast<double>(probs.size());
    return threshold_activation(mean, threshold, used_fallback);
}

struct RobustnessPoint {
    double sigma_p = 0.0;
    double model_snr_accuracy = 0.0;
    double model_activation_ratio = 0.0;
    double baseline_snr_accuracy = 0.0;  // exact solver fed one noisy draw
};

/// Sweeps sigma over the grid. For each instance the model decides through
/// the mean activation policy over M noisy samples; the baseline re-solves
/// exactly on the first noisy sample. Both are scored against the optimum at
/// the true position.
inline std::vector<RobustnessPoint> robust_eval(const Policy& policy, const Dataset& ds,
                                                const std::vector<double>& sigma_grid,
                                                const UncertaintyConfig& base_cfg,
                                                int max_instances = -1, int threads = 0) {
    base_cfg.validate();
    if (ds.records.empty()) throw std::invalid_argument("robust_eval: empty dataset");
    const int n_inst = (max_instances < 0) ? ds.size() : std::min(max_instances, ds.size());
    const auto layout = antenna_positions(ds.config);
    const double rho = ds.config.transmit_snr_linear();

    std::vector<RobustnessPoint> out;
    for (std::size_t si = 0; si < sigma_grid.size(); ++si) {
        UncertaintyConfig cfg = base_cfg;
        cfg.sigma_p = sigma_grid[si];

        std::vector<double> model_acc(static_cast<std::size_t>(n_inst));
        std::vector<double> model_ratio(static_cast<std::size_t>(n_inst));
        std::vector<double> base_acc(static_cast<std::size_t>(n_inst));

        parallel_for(n_inst, threads, [&](int i) {
            const auto& rec = ds.records[static_cast<std::size_t>(i)];
            const auto tag = si * 0x10000ull + static_cast<std::uint64_t>(i);
            const auto positions = sample_noisy_positions(rec.user, ds.config, cfg, tag);

            std::vector<std::vector<double>> probs;
            probs.reserve(positions.size());
            for (const auto& pos : positions)
                probs.push_back(policy.probabilities(compute_channel(ds.config, layout, pos)));
            const ActivationVector decision = mean_activation_policy(probs, cfg.threshold);

            const ChannelVector true_channel = rec.channel();
            model_acc[static_cast<std::size_t>(i)] =
                evaluate_snr(ds.config, true_channel, decision) / rec.optimal_snr;
            model_ratio[static_cast<std::size_t>(i)] =
                static_cast<double>(decision.n_active()) / ds.config.n_antennas;

            const auto noisy_channel = compute_channel(ds.config, layout, positions.front());
            const auto solved = angle_sweep_max_ratio(noisy_channel, rho);
            base_acc[static_cast<std::size_t>(i)] =
                evaluate_snr(ds.config, true_channel, solved.activation) / rec.optimal_snr;
        });

        RobustnessPoint pt;
        pt.sigma_p = cfg.sigma_p;
        for (int i = 0; i < n_inst; ++i) {
            pt.model_snr_accuracy += model_acc[static_cast<std::size_t>(i)];
            pt.model_activation_ratio += model_ratio[static_cast<std::size_t>(i)];
            pt.baseline_snr_accuracy += base_acc[static_cast<std::size_t>(i)];
        }
        pt.model_snr_accuracy /= n_inst;
        pt.model_activation_ratio /= n_inst;
        pt.baseline_snr_accuracy /= n_inst;
        out.push_back(pt);
    }
    return out;
}

}  // namespace pinch
