#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/common.hpp"

namespace pinch {

enum class SolveMethod { BruteForce, Dinkelbach, AngleSweep };

inline const char* to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::BruteForce: return "brute";
        case SolveMethod::Dinkelbach: return "dinkelbach";
        case SolveMethod::AngleSweep: return "sweep";
    }
    return "?";
}

struct QfSolution {
    ActivationVector activation;
    double objective = 0.0;  // |a^T B|^2 / N_a
    double snr = 0.0;        // rho * objective
    double rate = 0.0;
    SolveMethod method = SolveMethod::BruteForce;
    int iterations = 0;
    std::vector<double> lambda_trace;  // Dinkelbach only, strictly increasing
};

struct DinkelbachConfig {
    double tolerance = 1e-9;  // absolute, on the parametric subproblem value / lambda step
    int max_iterations = 100;
    std::optional<double> initial_lambda;  // default: best-singleton objective

    void validate() const {
        if (!(tolerance > 0)) throw std::invalid_argument("dinkelbach: tolerance must be > 0");
        if (max_iterations < 1)
            throw std::invalid_argument("dinkelbach: max_iterations must be >= 1");
        if (initial_lambda && !(*initial_lambda >= 0))
            throw std::invalid_argument("dinkelbach: initial_lambda must be >= 0");
    }
};

class dinkelbach_error : public std::runtime_error {
public:
    dinkelbach_error(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), lambda_trace(std::move(trace)) {}
    std::vector<double> lambda_trace;
};

inline double objective_of(const ChannelVector& channel, const ActivationVector& a) {
    const int k = a.n_active();
    if (k == 0) throw std::invalid_argument("objective undefined for empty activation");
    return std::norm(active_sum(channel, a)) / k;
}

namespace detail {

// Deterministic preference among equal-valued candidates: fewer active
// antennas first, then the pattern that activates the lowest-indexed antenna
// at the first position where the two differ.
inline bool prefer_bits(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] > b[i];
    return false;
}

struct BestTracker {
    bool has = false;
    double value = 0.0;
    int k = 0;
    std::vector<std::uint8_t> bits;

    // make_bits() materializes the candidate only when needed.
    template <typename MakeBits>
    void offer(double v, int card, MakeBits&& make_bits) {
        if (!has || v > value) {
            value = v;
            k = card;
            bits = make_bits();
            has = true;
            return;
        }
        if (v == value) {
            if (card < k) {
                k = card;
                bits = make_bits();
                return;
            }
            if (card == k) {
                auto cand = make_bits();
                if (prefer_bits(cand, bits)) bits = std::move(cand);
            }
        }
    }
};

struct SweepEvent {
    double angle;
    int i, j;
};

// Rotates a projection direction phi through a full turn. The antennas sorted
// by Re(B_n e^{-j phi}) descending change order only at pairwise crossing
// angles; every prefix of every ordering encountered is a candidate subset.
// By the exchange argument, any maximizer of |a^T B|^2 with its cardinality
// fixed is such a prefix (taken at phi = arg of its coherent sum), so visiting
// them all is exhaustive for both the ratio objective and the parametric
// subproblem.
//
// visit(k, prefix_sum) is called for each candidate; order() exposes the
// current arrangement for materialization.
class PrefixSweep {
public:
    explicit PrefixSweep(const std::vector<std::complex<double>>& b) : b_(b) {}

    const std::vector<int>& order() const { return order_; }

    template <typename Visit>
    void run(Visit&& visit) {
        const int n = static_cast<int>(b_.size());
        if (n == 0) return;

        std::vector<SweepEvent> events;
        events.reserve(static_cast<std::size_t>(n) * (n - 1));
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const auto diff = b_[static_cast<std::size_t>(i)] - b_[static_cast<std::size_t>(j)];
                if (diff == std::complex<double>(0.0, 0.0)) continue;  // never cross
                const double th = std::atan2(diff.imag(), diff.real());
                events.push_back({th + kPi / 2, i, j});
                events.push_back({th - kPi / 2, i, j});
            }
        }

        double phi0 = 0.0;
        if (!events.empty()) {
            double amin = events[0].angle;
            for (const auto& e : events) amin = std::min(amin, e.angle);
            phi0 = amin - 1e-3;
            for (auto& e : events) {
                while (e.angle <= phi0) e.angle += kTwoPi;
                while (e.angle > phi0 + kTwoPi) e.angle -= kTwoPi;
            }
            std::sort(events.begin(), events.end(), [](const SweepEvent& a, const SweepEvent& b) {
                if (a.angle != b.angle) return a.angle < b.angle;
                if (a.i != b.i) return a.i < b.i;
                return a.j < b.j;
            });
        }

        rebuild(phi0);
        for (int k = 1; k <= n; ++k) visit(k, prefix_[static_cast<std::size_t>(k)]);

        for (const auto& e : events) {
            // Probe just past the crossing; ahead of any later event thanks to
            // the tiny offset, so the target order there is unambiguous.
            const double phi = e.angle + 1e-12;
            const bool want_i_first = projection_less(e.j, e.i, phi);
            const int pi = pos_[static_cast<std::size_t>(e.i)];
            const int pj = pos_[static_cast<std::size_t>(e.j)];
            const bool have_i_first = pi < pj;
            if (have_i_first == want_i_first) continue;  // stale event, already consistent

            if (std::abs(pi - pj) == 1) {
                const int lo = std::min(pi, pj);
                std::swap(order_[static_cast<std::size_t>(lo)], order_[static_cast<std::size_t>(lo) + 1]);
                pos_[static_cast<std::size_t>(order_[static_cast<std::size_t>(lo)])] = lo;
                pos_[static_cast<std::size_t>(order_[static_cast<std::size_t>(lo) + 1])] = lo + 1;
                prefix_[static_cast<std::size_t>(lo) + 1] =
                    prefix_[static_cast<std::size_t>(lo)] + b_[static_cast<std::size_t>(order_[static_cast<std::size_t>(lo)])];
                visit(lo + 1, prefix_[static_cast<std::size_t>(lo) + 1]);
            } else {
                // Simultaneous crossings left the pair non-adjacent; resort at
                // the probe angle and re-emit every prefix.
                rebuild(phi);
                for (int k = 1; k <= n; ++k) visit(k, prefix_[static_cast<std::size_t>(k)]);
            }
        }
    }

private:
    double projection(int i, double phi) const {
        const auto& v = b_[static_cast<std::size_t>(i)];
        return v.real() * std::cos(phi) + v.imag() * std::sin(phi);
    }

    // Strict ordering used throughout: projection descending, index ascending.
    bool projection_less(int i, int j, double phi) const {
        const double a = projection(i, phi);
        const double b = projection(j, phi);
        if (a != b) return a < b;
        return i > j;
    }

    void rebuild(double phi) {
        const int n = static_cast<int>(b_.size());
        order_.resize(static_cast<std::size_t>(n));
        pos_.resize(static_cast<std::size_t>(n));
        prefix_.assign(static_cast<std::size_t>(n) + 1, {0.0, 0.0});
        for (int i = 0; i < n; ++i) order_[static_cast<std::size_t>(i)] = i;
        std::sort(order_.begin(), order_.end(),
                  [&](int a, int b) { return projection_less(b, a, phi); });
        for (int p = 0; p < n; ++p) pos_[static_cast<std::size_t>(order_[static_cast<std::size_t>(p)])] = p;
        for (int k = 0; k < n; ++k)
            prefix_[static_cast<std::size_t>(k) + 1] =
                prefix_[static_cast<std::size_t>(k)] + b_[static_cast<std::size_t>(order_[static_cast<std::size_t>(k)])];
    }

    const std::vector<std::complex<double>>& b_;
    std::vector<int> order_;
    std::vector<int> pos_;
    std::vector<std::complex<double>> prefix_;
};

inline std::vector<std::uint8_t> bits_from_prefix(const std::vector<int>& order, int k, int n) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
    for (int p = 0; p < k; ++p) bits[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] = 1;
    return bits;
}

inline QfSolution finish_solution(const ChannelVector& channel, std::vector<std::uint8_t> bits,
                                  double objective, SolveMethod method, double rho) {
    QfSolution s;
    s.activation = ActivationVector(std::move(bits));
    s.objective = objective;
    s.snr = rho * objective;
    s.rate = achievable_rate(s.snr);
    s.method = method;
    (void)channel;
    return s;
}

// Best single antenna; the natural warm start for Dinkelbach since its ratio
// is always a feasible lower bound.
inline std::pair<int, double> best_singleton(const ChannelVector& channel) {
    int best = 0;
    double best_val = std::norm(channel[0]);
    for (int i = 1; i < channel.size(); ++i) {
        const double v = std::norm(channel[i]);
        if (v > best_val) {
            best = i;
            best_val = v;
        }
    }
    return {best, best_val};
}

}  // namespace detail

/// Exhaustive maximization of |a^T B|^2 / N_a over nonempty binary a.
/// Ground-truth oracle; guarded against exponential blowup.
inline QfSolution brute_force(const ChannelVector& channel, double rho = 1.0) {
    const int n = channel.size();
    if (n < 1) throw std::invalid_argument("brute_force: empty channel");
    if (n > 25)
        throw std::invalid_argument(
            "brute_force: refusing N > 25 (2^N enumeration); use the angle sweep instead");

    detail::BestTracker best;
    const std::uint32_t limit = 1u << n;
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
        std::complex<double> sum{0.0, 0.0};
        int k = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                sum += channel[i];
                ++k;
            }
        }
        best.offer(std::norm(sum) / k, k, [&] {
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) bits[static_cast<std::size_t>(i)] = 1;
            return bits;
        });
    }
    return detail::finish_solution(channel, std::move(best.bits), best.value,
                                   SolveMethod::BruteForce, rho);
}

/// Exact parametric subproblem: argmax over all binary a (empty allowed,
/// value 0) of |a^T B|^2 - lambda * N_a.
inline ActivationVector subproblem_exact(const ChannelVector& channel, double lambda) {
    if (!(lambda >= 0)) throw std::invalid_argument("subproblem: lambda must be >= 0");
    const int n = channel.size();

    detail::BestTracker best;
    best.has = true;  // empty activation, value 0
    best.value = 0.0;
    best.k = 0;
    best.bits.assign(static_cast<std::size_t>(n), 0);

    detail::PrefixSweep sweep(channel.gains());
    sweep.run([&](int k, std::complex<double> prefix) {
        best.offer(std::norm(prefix) - lambda * k, k,
                   [&] { return detail::bits_from_prefix(sweep.order(), k, n); });
    });
    return ActivationVector(std::move(best.bits));
}

/// Exact ratio maximization via the rotating-projection sweep; scales to
/// N in the thousands.
inline QfSolution angle_sweep_max_ratio(const ChannelVector& channel, double rho = 1.0) {
    const int n = channel.size();
    if (n < 1) throw std::invalid_argument("angle_sweep: empty channel");

    detail::BestTracker best;
    detail::PrefixSweep sweep(channel.gains());
    sweep.run([&](int k, std::complex<double> prefix) {
        best.offer(std::norm(prefix) / k, k,
                   [&] { return detail::bits_from_prefix(sweep.order(), k, n); });
    });
    QfSolution s = detail::finish_solution(channel, std::move(best.bits), best.value,
                                           SolveMethod::AngleSweep, rho);
    s.iterations = 1;
    return s;
}

using SubproblemSolver = std::function<ActivationVector(const ChannelVector&, double)>;

/// Dinkelbach iteration for the fractional objective. Each step solves the
/// parametric subproblem max |a^T B|^2 - lambda N_a exactly and raises lambda
/// to the incumbent ratio; the run ends when the subproblem value drops to
/// the tolerance, which is the global-optimality certificate.
inline QfSolution dinkelbach(const ChannelVector& channel, const DinkelbachConfig& cfg = {},
                             const SubproblemSolver& subsolver = subproblem_exact,
                             double rho = 1.0) {
    cfg.validate();
    const int n = channel.size();
    if (n < 1) throw std::invalid_argument("dinkelbach: empty channel");

    auto [best_idx, best_val] = detail::best_singleton(channel);
    std::vector<std::uint8_t> inc_bits(static_cast<std::size_t>(n), 0);
    inc_bits[static_cast<std::size_t>(best_idx)] = 1;
    ActivationVector incumbent(std::move(inc_bits));
    double incumbent_ratio = best_val;

    double lambda = cfg.initial_lambda.value_or(incumbent_ratio);
    std::vector<double> trace{lambda};

    int iterations = 0;
    while (true) {
        if (iterations >= cfg.max_iterations)
            throw dinkelbach_error("dinkelbach: max_iterations exceeded", trace);
        ++iterations;

        ActivationVector a = subsolver(channel, lambda);
        const int k = a.n_active();
        const double quad = (k > 0) ? std::norm(active_sum(channel, a)) : 0.0;
        const double value = quad - lambda * k;

        if (value <= cfg.tolerance) {
            // Certificate holds at the current lambda. Keep whichever
            // activation achieves the larger ratio.
            if (k > 0 && quad / k > incumbent_ratio) {
                incumbent = std::move(a);
                incumbent_ratio = quad / k;
            }
            QfSolution s = detail::finish_solution(channel, std::move(incumbent.bits),
                                                   incumbent_ratio, SolveMethod::Dinkelbach, rho);
            s.iterations = iterations;
            s.lambda_trace = std::move(trace);
            return s;
        }

        const double ratio = quad / k;
        if (!(ratio > lambda))
            throw dinkelbach_error("dinkelbach: lambda failed to increase", trace);
        incumbent = std::move(a);
        incumbent_ratio = ratio;
        lambda = ratio;
        trace.push_back(lambda);
    }
}

}  // namespace pinch
