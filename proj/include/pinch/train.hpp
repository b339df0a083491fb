#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pinch/dataset.hpp"
#include "pinch/loss.hpp"
#include "pinch/metrics.hpp"
#include "pinch/models.hpp"
#include "pinch/parallel.hpp"
#include "pinch/rng.hpp"

namespace pinch {

enum class LossMode { Bce, Augmented };

inline const char* to_string(LossMode m) { return m == LossMode::Bce ? "bce" : "augmented"; }
inline LossMode loss_mode_from_string(const std::string& s) {
    if (s == "bce") return LossMode::Bce;
    if (s == "augmented" || s == "aug") return LossMode::Augmented;
    throw std::invalid_argument("unknown loss mode: " + s);
}

struct TrainConfig {
    int iterations = 5000;
    int batch_size = 1000;
    double lr_start = 1e-4;
    double lr_end = 1e-5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    LossMode loss_mode = LossMode::Bce;
    LossConfig loss;
    int eval_interval = 50;
    int eval_train_subset = 1000;  // leading slice of the train set scored for the curve
    std::uint64_t seed = 1;
    int shard_size = 64;  // batch slices evaluated as independent graphs
    int threads = 0;      // 0 = hardware concurrency

    void validate() const {
        if (iterations < 0 || batch_size < 1) throw std::invalid_argument("train: bad sizes");
        if (shard_size < 1) throw std::invalid_argument("train: bad shard size");
        loss.validate();
    }
};

struct CurvePoint {
    int iteration = 0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double loss = 0.0;
};

struct TrainResult {
    std::vector<CurvePoint> curve;
    double final_train_acc = 0.0;
    double final_val_acc = 0.0;
    int iterations_run = 0;
};

namespace detail {

// Cycles through epoch permutations of the training set.
class BatchCursor {
public:
    BatchCursor(std::uint64_t seed, std::uint32_t n) : rng_(CounterRng(seed).derive(rng_stream::kBatchShuffle)), n_(n) {
        reshuffle();
    }
    std::vector<int> next(int count) {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(count));
        while (count-- > 0) {
            if (cursor_ == n_) reshuffle();
            out.push_back(static_cast<int>(perm_[cursor_++]));
        }
        return out;
    }

private:
    void reshuffle() {
        perm_ = rng_.derive(epoch_++).permutation(n_);
        cursor_ = 0;
    }
    CounterRng rng_;
    std::uint32_t n_;
    std::uint64_t epoch_ = 0;
    std::vector<std::uint32_t> perm_;
    std::uint32_t cursor_ = 0;
};

struct ShardTensors {
    BatchFeatures features;
    ad::Tensor labels;      // (B*N) x 1
    ad::Tensor chan_re;     // (B*N) x 1
    ad::Tensor chan_im;     // (B*N) x 1
    ad::Tensor gamma_star;  // B x 1
};

inline ShardTensors make_shard(const Dataset& ds, const std::vector<int>& indices, int first,
                               int count) {
    const int n = ds.config.n_antennas;
    std::vector<const ChannelVector*> chans;
    std::vector<ChannelVector> storage;
    storage.reserve(static_cast<std::size_t>(count));
    std::vector<double> labels(static_cast<std::size_t>(count) * n);
    std::vector<double> re(static_cast<std::size_t>(count) * n);
    std::vector<double> im(static_cast<std::size_t>(count) * n);
    std::vector<double> gstar(static_cast<std::size_t>(count));

    for (int b = 0; b < count; ++b) {
        const auto& rec = ds.records[static_cast<std::size_t>(indices[static_cast<std::size_t>(first + b)])];
        storage.push_back(rec.channel());
        gstar[static_cast<std::size_t>(b)] = rec.optimal_snr;
        for (int a = 0; a < n; ++a) {
            const std::size_t row = static_cast<std::size_t>(b) * n + a;
            labels[row] = rec.optimal_activation.bits[static_cast<std::size_t>(a)] ? 1.0 : 0.0;
            re[row] = storage.back()[a].real();
            im[row] = storage.back()[a].imag();
        }
    }
    chans.reserve(storage.size());
    for (const auto& c : storage) chans.push_back(&c);

    ShardTensors t;
    t.features = make_batch_features(chans);
    t.labels = ad::Tensor::constant(count * n, 1, std::move(labels));
    t.chan_re = ad::Tensor::constant(count * n, 1, std::move(re));
    t.chan_im = ad::Tensor::constant(count * n, 1, std::move(im));
    t.gamma_star = ad::Tensor::constant(count, 1, std::move(gstar));
    return t;
}

}  // namespace detail

/// Mean SNR accuracy of the policy's thresholded predictions over the given
/// record range.
inline double snr_accuracy(const Policy& policy, const Dataset& ds, int limit = -1,
                           int threads = 0, double threshold = 0.5) {
    const int n = (limit < 0) ? ds.size() : std::min(limit, ds.size());
    if (n == 0) return 0.0;
    std::vector<double> ratios(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const auto& rec = ds.records[static_cast<std::size_t>(i)];
        const auto probs = policy.probabilities(rec.channel());
        ratios[static_cast<std::size_t>(i)] =
            evaluate_instance(ds.config, rec, probs, threshold).snr_ratio;
    });
    double sum = 0.0;
    for (double r : ratios) sum += r;
    return sum / n;
}

/// Supervised training with Adam and linearly scheduled learning rate and
/// loss coefficients. Batches shard into independent graphs evaluated in
/// parallel; gradients merge in shard order, so results do not depend on the
/// thread count.
inline TrainResult train(Policy& policy, const Dataset& train_set, const Dataset& val_set,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.records.empty()) throw std::invalid_argument("train: empty training set");
    if (train_set.config_hash() != val_set.config_hash())
        throw std::invalid_argument("train: train/val datasets disagree on the system config");

    const int n_params = static_cast<int>(policy.values().size());
    std::vector<std::vector<double>> adam_m(static_cast<std::size_t>(n_params));
    std::vector<std::vector<double>> adam_v(static_cast<std::size_t>(n_params));
    for (int p = 0; p < n_params; ++p) {
        adam_m[static_cast<std::size_t>(p)].assign(policy.values()[static_cast<std::size_t>(p)].size(), 0.0);
        adam_v[static_cast<std::size_t>(p)].assign(policy.values()[static_cast<std::size_t>(p)].size(), 0.0);
    }

    detail::BatchCursor cursor(cfg.seed, static_cast<std::uint32_t>(train_set.size()));
    const double rho = train_set.config.transmit_snr_linear();
    const int n_ant = train_set.config.n_antennas;

    TrainResult result;
    auto record_point = [&](int iter, double loss_value) {
        CurvePoint pt;
        pt.iteration = iter;
        pt.loss = loss_value;
        pt.train_acc = snr_accuracy(policy, train_set, cfg.eval_train_subset, cfg.threads);
        pt.val_acc = snr_accuracy(policy, val_set, -1, cfg.threads);
        result.curve.push_back(pt);
    };

    double last_loss = 0.0;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const double progress = cfg.iterations > 1
                                    ? static_cast<double>(iter) / (cfg.iterations - 1)
                                    : 0.0;
        const double lr = cfg.lr_start + (cfg.lr_end - cfg.lr_start) * progress;

        const auto batch = cursor.next(cfg.batch_size);
        const int n_shards = (cfg.batch_size + cfg.shard_size - 1) / cfg.shard_size;

        std::vector<std::vector<std::vector<double>>> shard_grads(static_cast<std::size_t>(n_shards));
        std::vector<double> shard_loss(static_cast<std::size_t>(n_shards), 0.0);

        parallel_for(n_shards, cfg.threads, [&](int s) {
            const int first = s * cfg.shard_size;
            const int count = std::min(cfg.shard_size, cfg.batch_size - first);
            auto tensors = detail::make_shard(train_set, batch, first, count);
            auto bound = policy.bind(true);
            auto logits = policy.forward(bound, tensors.features);

            ad::Tensor loss;
            if (cfg.loss_mode == LossMode::Bce) {
                loss = loss_bce(ad::sigmoid(logits), tensors.labels, cfg.batch_size,
                                cfg.loss.prob_clamp);
            } else {
                loss = loss_augmented(logits, tensors.labels, tensors.chan_re, tensors.chan_im,
                                      tensors.gamma_star, n_ant, rho, cfg.loss, progress,
                                      cfg.batch_size)
                           .total;
            }
            loss.backward();
            shard_loss[static_cast<std::size_t>(s)] = loss.scalar();
            auto& grads = shard_grads[static_cast<std::size_t>(s)];
            grads.reserve(bound.size());
            for (auto& t : bound) grads.emplace_back(t.grad().begin(), t.grad().end());
        });

        double loss_value = 0.0;
        for (double l : shard_loss) loss_value += l;
        if (!std::isfinite(loss_value))
            throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(iter));
        last_loss = loss_value;

        // Deterministic merge in shard order, then one Adam step.
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, iter + 1);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, iter + 1);
        for (int p = 0; p < n_params; ++p) {
            auto& value = policy.values()[static_cast<std::size_t>(p)];
            auto& m = adam_m[static_cast<std::size_t>(p)];
            auto& v = adam_v[static_cast<std::size_t>(p)];
            for (std::size_t i = 0; i < value.size(); ++i) {
                double g = 0.0;
                for (int s = 0; s < n_shards; ++s)
                    g += shard_grads[static_cast<std::size_t>(s)][static_cast<std::size_t>(p)][i];
                m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
                v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
                value[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
            }
        }

        if (cfg.eval_interval > 0 &&
            ((iter + 1) % cfg.eval_interval == 0 || iter + 1 == cfg.iterations))
            record_point(iter + 1, loss_value);
    }

    if (result.curve.empty() && cfg.iterations >= 0) record_point(cfg.iterations, last_loss);
    result.final_train_acc = result.curve.back().train_acc;
    result.final_val_acc = result.curve.back().val_acc;
    result.iterations_run = cfg.iterations;
    return result;
}

}  // namespace pinch
