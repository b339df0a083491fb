#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinch/common.hpp"
#include "pinch/config.hpp"
#include "pinch/geometry.hpp"

namespace pinch {

/// Complex effective per-antenna gains B_n: free-space attenuation and phase
/// from antenna to user, times the waveguide phase accumulated from the feed
/// point to the antenna.
class ChannelVector {
public:
    ChannelVector() = default;
    explicit ChannelVector(std::vector<std::complex<double>> gains)
        : gains_(std::move(gains)) {
        for (const auto& g : gains_) {
            if (!(std::abs(g) > 0.0) || !std::isfinite(g.real()) || !std::isfinite(g.imag()))
                throw std::invalid_argument("channel: gains must be finite and nonzero");
        }
    }

    int size() const { return static_cast<int>(gains_.size()); }
    const std::vector<std::complex<double>>& gains() const { return gains_; }
    const std::complex<double>& operator[](int n) const {
        return gains_[static_cast<std::size_t>(n)];
    }

    double magnitude(int n) const { return std::abs(gains_[static_cast<std::size_t>(n)]); }
    /// Phase in (-pi, pi].
    double phase(int n) const {
        return wrap_phase(std::arg(gains_[static_cast<std::size_t>(n)]));
    }

private:
    std::vector<std::complex<double>> gains_;
};

struct ActivationVector {
    std::vector<std::uint8_t> bits;

    ActivationVector() = default;
    explicit ActivationVector(std::vector<std::uint8_t> b) : bits(std::move(b)) {}
    static ActivationVector zeros(int n) {
        return ActivationVector(std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
    }

    int size() const { return static_cast<int>(bits.size()); }
    int n_active() const {
        int k = 0;
        for (auto b : bits) k += b;
        return k;
    }

    std::string bitstring() const {
        std::string s(bits.size(), '0');
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) s[i] = '1';
        return s;
    }
    static ActivationVector from_bitstring(const std::string& s) {
        ActivationVector a;
        a.bits.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1')
                throw std::invalid_argument("activation bitstring: expected only 0/1");
            a.bits.push_back(c == '1');
        }
        return a;
    }

    friend bool operator==(const ActivationVector& a, const ActivationVector& b) {
        return a.bits == b.bits;
    }
};

inline ChannelVector compute_channel(const SystemConfig& cfg, const AntennaLayout& layout,
                                     const UserPosition& user) {
    const double lambda = cfg.free_space_wavelength();
    const double lambda_g = cfg.guided_wavelength();
    std::vector<std::complex<double>> gains;
    gains.reserve(layout.positions.size());
    for (int n = 0; n < layout.size(); ++n) {
        const double d = distance(user.vec(), layout.positions[static_cast<std::size_t>(n)]);
        if (!(d > 0.0))
            throw std::invalid_argument("channel: user coincides with antenna " + std::to_string(n));
        const double phase =
            -kTwoPi / lambda * d - kTwoPi / lambda_g * layout.waveguide_distance(n);
        gains.push_back(std::polar(1.0 / d, wrap_phase(phase)));
    }
    return ChannelVector(std::move(gains));
}

inline ChannelVector compute_channel(const SystemConfig& cfg, const UserPosition& user) {
    return compute_channel(cfg, antenna_positions(cfg), user);
}

/// Coherent sum a^T B over the active antennas.
inline std::complex<double> active_sum(const ChannelVector& channel, const ActivationVector& a) {
    if (a.size() != channel.size())
        throw std::invalid_argument("activation/channel length mismatch");
    std::complex<double> s{0.0, 0.0};
    for (int n = 0; n < channel.size(); ++n)
        if (a.bits[static_cast<std::size_t>(n)]) s += channel[n];
    return s;
}

/// Received SNR gamma = rho/N_a * |a^T B|^2. The transmit power splits
/// equally over the N_a active antennas, hence the division.
inline double evaluate_snr(const SystemConfig& cfg, const ChannelVector& channel,
                           const ActivationVector& a) {
    const int na = a.n_active();
    if (na == 0) throw std::invalid_argument("empty activation: SNR undefined for N_a = 0");
    const double coherent = std::norm(active_sum(channel, a));
    return cfg.transmit_snr_linear() / na * coherent;
}

inline double achievable_rate(double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("rate: negative SNR");
    return std::log2(1.0 + gamma);
}

/// Q = Re(B) Re(B)^T + Im(B) Im(B)^T. Real, symmetric, PSD, rank <= 2, and
/// a^T Q a = |a^T B|^2 for every binary a.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(int n, std::vector<double> entries) : n_(n), m_(std::move(entries)) {
        if (m_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
            throw std::invalid_argument("QMatrix: entry count does not match dimension");
    }

    int size() const { return n_; }
    double at(int i, int j) const {
        return m_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                   static_cast<std::size_t>(j)];
    }
    const std::vector<double>& entries() const { return m_; }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : m_) s += v * v;
        return std::sqrt(s);
    }

private:
    int n_ = 0;
    std::vector<double> m_;
};

inline QMatrix build_q(const ChannelVector& channel) {
    const int n = channel.size();
    std::vector<double> m(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            // Re(B_i conj(B_j)); symmetric by construction.
            const double v = channel[i].real() * channel[j].real() +
                             channel[i].imag() * channel[j].imag();
            m[static_cast<std::size_t>(i) * n + j] = v;
            m[static_cast<std::size_t>(j) * n + i] = v;
        }
    }
    return QMatrix(n, std::move(m));
}

inline double quad_form(const QMatrix& q, const ActivationVector& a) {
    if (a.size() != q.size()) throw std::invalid_argument("activation/Q size mismatch");
    double s = 0.0;
    for (int i = 0; i < q.size(); ++i) {
        if (!a.bits[static_cast<std::size_t>(i)]) continue;
        for (int j = 0; j < q.size(); ++j)
            if (a.bits[static_cast<std::size_t>(j)]) s += q.at(i, j);
    }
    return s;
}

/// Idealized co-located array at the region center (0, 0, H): N antennas,
/// equal power split, perfect coherent combining at the user. Works out to
/// gamma = rho * N / d^2.
inline double conventional_baseline_snr(const SystemConfig& cfg, const UserPosition& user) {
    const Vec3 center{0.0, 0.0, cfg.antenna_height_m};
    const double d = distance(user.vec(), center);
    if (!(d > 0.0)) throw std::invalid_argument("baseline: user coincides with array center");
    return cfg.transmit_snr_linear() * cfg.n_antennas / (d * d);
}

}  // namespace pinch
