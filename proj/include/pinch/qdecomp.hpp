#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/common.hpp"

namespace pinch {

/// Top-2 eigenpairs of the rank-<=2 PSD matrix Q = Re(B B^H). The rank-r
/// generalization for r > 2 is intentionally not implemented.
struct QDecomposition {
    double lambda1 = 0.0;  // lambda1 >= lambda2 >= 0
    double lambda2 = 0.0;
    std::vector<double> u1;  // orthonormal
    std::vector<double> u2;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void scale_inplace(std::vector<double>& a, double s) {
    for (double& v : a) v *= s;
}

inline std::vector<double> matvec(const QMatrix& q, const std::vector<double>& x) {
    const int n = q.size();
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += q.at(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

// Eigen-decomposition of [[a, c], [c, d]]; returns (l1, l2, cos, sin) with
// l1 >= l2 and top eigenvector (cos, sin).
struct TwoByTwoEig {
    double l1, l2, c, s;
};

inline TwoByTwoEig eig2x2(double a, double c, double d) {
    const double tr = a + d;
    const double diff = a - d;
    const double disc = std::sqrt(diff * diff + 4.0 * c * c);
    const double l1 = 0.5 * (tr + disc);
    const double l2 = 0.5 * (tr - disc);
    double vx, vy;
    // Pick the better-conditioned formulation of (Q - l1 I) v = 0.
    if (std::abs(l1 - d) >= std::abs(l1 - a)) {
        vx = l1 - d;
        vy = c;
    } else {
        vx = c;
        vy = l1 - a;
    }
    const double nrm = std::hypot(vx, vy);
    if (nrm == 0.0) return {l1, l2, 1.0, 0.0};  // already diagonal
    return {l1, l2, vx / nrm, vy / nrm};
}

// Exact eigenpairs from an orthonormal basis {e1, e2} of range(Q) via the
// projected 2x2 problem. This is what makes the decomposition reliable even
// when lambda1 and lambda2 nearly coincide and plain power iteration stalls.
inline QDecomposition rayleigh_ritz(const QMatrix& q, const std::vector<double>& e1,
                                    const std::vector<double>& e2) {
    const auto qe1 = matvec(q, e1);
    const auto qe2 = matvec(q, e2);
    const double m11 = dot(e1, qe1);
    const double m12 = dot(e1, qe2);
    const double m22 = dot(e2, qe2);
    const auto eig = eig2x2(m11, m12, m22);

    QDecomposition d;
    d.lambda1 = std::max(eig.l1, 0.0);
    d.lambda2 = std::max(eig.l2, 0.0);
    const std::size_t n = e1.size();
    d.u1.resize(n);
    d.u2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.u1[i] = eig.c * e1[i] + eig.s * e2[i];
        d.u2[i] = -eig.s * e1[i] + eig.c * e2[i];
    }
    return d;
}

inline void check_residual(const QMatrix& q, const QDecomposition& d) {
    const int n = q.size();
    const double fro = q.frobenius_norm();
    double resid = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double r = q.at(i, j) -
                             d.lambda1 * d.u1[static_cast<std::size_t>(i)] * d.u1[static_cast<std::size_t>(j)] -
                             d.lambda2 * d.u2[static_cast<std::size_t>(i)] * d.u2[static_cast<std::size_t>(j)];
            resid += r * r;
        }
    }
    if (std::sqrt(resid) > 1e-8 * std::max(fro, 1e-300))
        throw std::runtime_error("Q not rank-2: eigen reconstruction residual exceeds bound");
}

// Deterministic unit vector orthogonal to u (n >= 2): take the coordinate
// axis least aligned with u and orthogonalize.
inline std::vector<double> orthogonal_complement(const std::vector<double>& u) {
    std::size_t pick = 0;
    double best = std::abs(u[0]);
    for (std::size_t i = 1; i < u.size(); ++i) {
        if (std::abs(u[i]) < best) {
            best = std::abs(u[i]);
            pick = i;
        }
    }
    std::vector<double> v(u.size(), 0.0);
    v[pick] = 1.0;
    const double proj = dot(v, u);
    for (std::size_t i = 0; i < u.size(); ++i) v[i] -= proj * u[i];
    const double nrm = nrm2(v);
    for (auto& x : v) x /= nrm;
    return v;
}

}  // namespace detail

/// Eigen-decomposition of Q by power iteration with deflation, refined by the
/// exact projected 2x2 solve. Throws "Q not rank-2" if the top-2 eigenpairs
/// cannot reconstruct Q to 1e-8 relative in Frobenius norm.
inline QDecomposition decompose_q(const QMatrix& q) {
    const int n = q.size();
    if (n < 1) throw std::invalid_argument("decompose_q: empty matrix");
    const double fro = q.frobenius_norm();

    QDecomposition d;
    if (fro == 0.0) {
        d.u1.assign(static_cast<std::size_t>(n), 0.0);
        d.u2.assign(static_cast<std::size_t>(n), 0.0);
        d.u1[0] = 1.0;
        if (n > 1) d.u2[1] = 1.0;
        return d;
    }
    if (n == 1) {
        d.lambda1 = q.at(0, 0);
        d.u1 = {1.0};
        d.u2 = {0.0};
        detail::check_residual(q, d);
        return d;
    }

    constexpr int kMaxIters = 10000;
    constexpr double kTol = 1e-12;

    // Dominant eigenvector; start from the heaviest column (never in the null
    // space of a PSD matrix).
    std::vector<double> v(static_cast<std::size_t>(n));
    {
        int jbest = 0;
        double nbest = -1.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += q.at(i, j) * q.at(i, j);
            if (s > nbest) {
                nbest = s;
                jbest = j;
            }
        }
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = q.at(i, jbest);
        detail::scale_inplace(v, 1.0 / detail::nrm2(v));
    }
    double lambda1 = 0.0;
    for (int it = 0; it < kMaxIters; ++it) {
        auto y = detail::matvec(q, v);
        lambda1 = detail::dot(v, y);
        double resid = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = y[i] - lambda1 * v[i];
            resid += r * r;
        }
        if (std::sqrt(resid) <= kTol * fro) break;
        const double ynrm = detail::nrm2(y);
        if (ynrm == 0.0) break;
        detail::scale_inplace(y, 1.0 / ynrm);
        v = std::move(y);
    }
    std::vector<double> u1 = v;

    // Deflate and repeat for the second direction.
    auto deflated_col = [&](int j, std::vector<double>& out) {
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] =
                q.at(i, j) - lambda1 * u1[static_cast<std::size_t>(i)] * u1[static_cast<std::size_t>(j)];
    };
    std::vector<double> u2;
    {
        std::vector<double> col(static_cast<std::size_t>(n));
        int jbest = -1;
        double nbest = 0.0;
        for (int j = 0; j < n; ++j) {
            deflated_col(j, col);
            const double s = detail::nrm2(col);
            if (s > nbest) {
                nbest = s;
                jbest = j;
            }
        }
        if (jbest < 0 || nbest <= 1e-13 * fro) {
            u2 = detail::orthogonal_complement(u1);  // effectively rank 1
        } else {
            deflated_col(jbest, col);
            detail::scale_inplace(col, 1.0 / detail::nrm2(col));
            for (int it = 0; it < kMaxIters; ++it) {
                auto y = detail::matvec(q, col);
                const double a1 = detail::dot(u1, col);
                for (std::size_t i = 0; i < y.size(); ++i) y[i] -= lambda1 * u1[i] * a1;
                const double mu = detail::dot(col, y);
                double resid = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    const double r = y[i] - mu * col[i];
                    resid += r * r;
                }
                if (std::sqrt(resid) <= kTol * fro) break;
                const double ynrm = detail::nrm2(y);
                if (ynrm == 0.0) break;
                detail::scale_inplace(y, 1.0 / ynrm);
                col = std::move(y);
            }
            // Re-orthogonalize against u1 before the projected solve.
            const double proj = detail::dot(col, u1);
            for (std::size_t i = 0; i < col.size(); ++i) col[i] -= proj * u1[i];
            const double nrm = detail::nrm2(col);
            if (nrm <= 1e-13) {
                u2 = detail::orthogonal_complement(u1);
            } else {
                detail::scale_inplace(col, 1.0 / nrm);
                u2 = std::move(col);
            }
        }
    }

    QDecomposition out = detail::rayleigh_ritz(q, u1, u2);
    detail::check_residual(q, out);
    return out;
}

/// Exact decomposition when the channel vector is at hand: range(Q) is
/// spanned by Re(B) and Im(B), so a Gram-Schmidt basis plus the projected
/// 2x2 solve gives the eigenpairs directly.
inline QDecomposition decompose_q(const QMatrix& q, const ChannelVector& b) {
    const int n = q.size();
    if (b.size() != n) throw std::invalid_argument("decompose_q: channel/Q size mismatch");

    std::vector<double> re(static_cast<std::size_t>(n)), im(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        re[static_cast<std::size_t>(i)] = b[i].real();
        im[static_cast<std::size_t>(i)] = b[i].imag();
    }
    const double re_nrm = detail::nrm2(re);
    const double im_nrm = detail::nrm2(im);
    const double scale = std::max(re_nrm, im_nrm);
    if (scale == 0.0) return decompose_q(q);  // degenerate, fall back

    std::vector<double> e1 = (re_nrm >= im_nrm) ? re : im;
    detail::scale_inplace(e1, 1.0 / detail::nrm2(e1));
    std::vector<double> e2 = (re_nrm >= im_nrm) ? im : re;
    const double proj = detail::dot(e1, e2);
    for (std::size_t i = 0; i < e2.size(); ++i) e2[i] -= proj * e1[i];
    const double e2n = detail::nrm2(e2);
    if (e2n <= 1e-13 * scale) {
        e2 = detail::orthogonal_complement(e1);
    } else {
        detail::scale_inplace(e2, 1.0 / e2n);
    }

    QDecomposition out = detail::rayleigh_ritz(q, e1, e2);
    detail::check_residual(q, out);
    return out;
}

/// Compatible complex vector B' = alpha*u1 + j*beta*u2 with alpha^2 = lambda1,
/// beta^2 = lambda2. One representative of the non-unique family: alpha and
/// beta are nonnegative and each eigenvector's first nonzero component is
/// made positive.
inline ChannelVector reconstruct_b(const QDecomposition& d) {
    auto sign_fixed = [](std::vector<double> u) {
        for (double x : u) {
            if (x != 0.0) {
                if (x < 0.0)
                    for (double& v : u) v = -v;
                break;
            }
        }
        return u;
    };
    const auto u1 = sign_fixed(d.u1);
    const auto u2 = sign_fixed(d.u2);
    const double alpha = std::sqrt(d.lambda1);
    const double beta = std::sqrt(d.lambda2);

    std::vector<std::complex<double>> gains(u1.size());
    for (std::size_t i = 0; i < u1.size(); ++i)
        gains[i] = std::complex<double>(alpha * u1[i], beta * u2[i]);
    return ChannelVector(std::move(gains));
}

}  // namespace pinch
