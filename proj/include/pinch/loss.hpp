#pragma once

#include <stdexcept>
#include <vector>

#include "pinch/autodiff.hpp"
#include "pinch/channel.hpp"

namespace pinch {

struct LossSchedule {
    double start = 0.0;
    double end = 0.0;
    double at(double progress) const { return start + (end - start) * progress; }
};

struct LossConfig {
    double alpha = 1.6;                         // positive-class weight, >= 1
    LossSchedule lambda_wbce{0.5, 0.3};
    LossSchedule lambda_snr{2.0, 8.0};
    LossSchedule lambda_collapse{100.0, 20.0};
    double collapse_margin = 0.1;
    double soft_count_epsilon = 1e-8;           // keeps the soft N_a away from zero
    double prob_clamp = 1e-12;

    void validate() const {
        if (!(alpha >= 1.0)) throw std::invalid_argument("loss: alpha must be >= 1");
        if (!(collapse_margin >= 0)) throw std::invalid_argument("loss: bad collapse margin");
    }
};

/// Plain BCE: -sum_n [y log p + (1-y) log(1-p)] per instance, averaged over
/// the batch. `batch_denom` is the denominator of that average so that shards
/// of a larger batch compose exactly.
inline ad::Tensor loss_bce(const ad::Tensor& probs, const ad::Tensor& labels, int batch_denom,
                           double prob_clamp = 1e-12) {
    if (probs.rows() != labels.rows() || probs.cols() != 1 || labels.cols() != 1)
        throw std::invalid_argument("bce: probs/labels must be matching column vectors");
    auto p = ad::clamp(probs, prob_clamp, 1.0 - prob_clamp);
    auto pos = ad::mul(labels, ad::log_op(p));
    auto neg = ad::mul(ad::rsub_scalar(1.0, labels), ad::log_op(ad::rsub_scalar(1.0, p)));
    return ad::mul_scalar(ad::sum_all(ad::add(pos, neg)), -1.0 / batch_denom);
}

/// Differentiable SNR surrogate: soft probabilities replace the bits and
/// their sum replaces N_a, reducing exactly to the hard SNR at binary p.
/// gamma_hat = rho |p^T B|^2 / (sum p + eps), shape (B x 1).
inline ad::Tensor soft_snr(const ad::Tensor& probs, const ad::Tensor& chan_re,
                           const ad::Tensor& chan_im, int n_antennas, double rho,
                           double eps = 1e-8) {
    auto re = ad::segment_sum(ad::mul(probs, chan_re), n_antennas);
    auto im = ad::segment_sum(ad::mul(probs, chan_im), n_antennas);
    auto power = ad::add(ad::mul(re, re), ad::mul(im, im));
    auto count = ad::add_scalar(ad::segment_sum(probs, n_antennas), eps);
    return ad::mul_scalar(ad::div(power, count), rho);
}

struct AugmentedLoss {
    ad::Tensor total;
    ad::Tensor wbce;      // class-weighted BCE on the importance scores
    ad::Tensor snr_dev;   // mean (1 - gamma_hat/gamma*)^2
    ad::Tensor collapse;  // mean ReLU(margin - gamma_hat/gamma*)
    double coeff_wbce = 0.0, coeff_snr = 0.0, coeff_collapse = 0.0;
};

/// Composite loss on raw importance scores: weighted BCE plus signal-aware
/// penalties against the labeled optimal SNR. Coefficients follow their
/// linear schedules at `progress` in [0, 1].
inline AugmentedLoss loss_augmented(const ad::Tensor& importances, const ad::Tensor& labels,
                                    const ad::Tensor& chan_re, const ad::Tensor& chan_im,
                                    const ad::Tensor& gamma_star, int n_antennas, double rho,
                                    const LossConfig& cfg, double progress, int batch_denom) {
    cfg.validate();
    if (importances.cols() != 1) throw std::invalid_argument("augmented: importances must be a column");
    for (double g : gamma_star.value())
        if (!(g > 0)) throw std::invalid_argument("augmented: gamma_star must be positive");

    const int rows = importances.rows();
    if (rows % n_antennas != 0 || rows / n_antennas != gamma_star.rows())
        throw std::invalid_argument("augmented: shape mismatch");

    // -log sigmoid(x) = softplus(-x), -log(1 - sigmoid(x)) = softplus(x).
    auto pos = ad::mul_scalar(ad::mul(labels, ad::softplus(ad::mul_scalar(importances, -1.0))),
                              cfg.alpha);
    auto neg = ad::mul(ad::rsub_scalar(1.0, labels), ad::softplus(importances));
    auto wbce = ad::mul_scalar(ad::sum_all(ad::add(pos, neg)),
                               1.0 / (static_cast<double>(n_antennas) * batch_denom));

    auto probs = ad::sigmoid(importances);
    auto gamma_hat = soft_snr(probs, chan_re, chan_im, n_antennas, rho, cfg.soft_count_epsilon);
    auto ratio = ad::div(gamma_hat, gamma_star);
    auto dev = ad::rsub_scalar(1.0, ratio);
    auto snr_dev = ad::mul_scalar(ad::sum_all(ad::mul(dev, dev)), 1.0 / batch_denom);
    auto collapse = ad::mul_scalar(ad::sum_all(ad::relu(ad::rsub_scalar(cfg.collapse_margin, ratio))),
                                   1.0 / batch_denom);

    AugmentedLoss out;
    out.coeff_wbce = cfg.lambda_wbce.at(progress);
    out.coeff_snr = cfg.lambda_snr.at(progress);
    out.coeff_collapse = cfg.lambda_collapse.at(progress);
    out.wbce = wbce;
    out.snr_dev = snr_dev;
    out.collapse = collapse;
    out.total = ad::add(ad::add(ad::mul_scalar(wbce, out.coeff_wbce),
                                ad::mul_scalar(snr_dev, out.coeff_snr)),
                        ad::mul_scalar(collapse, out.coeff_collapse));
    return out;
}

}  // namespace pinch
