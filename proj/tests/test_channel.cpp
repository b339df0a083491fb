#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "pinch/channel.hpp"
#include "pinch/rng.hpp"
#include "test_util.hpp"

using namespace pinch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
ActivationVector bits(std::initializer_list<int> v) {
    std::vector<std::uint8_t> b;
    for (int x : v) b.push_back(static_cast<std::uint8_t>(x));
    return ActivationVector(std::move(b));
}
}  // namespace

TEST_CASE("unit distance below an antenna gives unit gain", "[channel]") {
    SystemConfig cfg;
    cfg.n_antennas = 5;
    auto layout = antenna_positions(cfg);
    // 1 m below antenna 0 (the feed point, so no waveguide phase).
    UserPosition u{layout.positions[0].x, 0.0, cfg.antenna_height_m - 1.0};
    auto ch = compute_channel(cfg, layout, u);
    CHECK_THAT(ch.magnitude(0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(ch.phase(0), WithinAbs(wrap_phase(-kTwoPi / cfg.free_space_wavelength()), 1e-9));
}

TEST_CASE("feed antenna carries no waveguide phase", "[channel]") {
    SystemConfig cfg;
    cfg.n_antennas = 4;
    auto layout = antenna_positions(cfg);
    UserPosition u{1.0, 2.0, 0.5};
    auto ch = compute_channel(cfg, layout, u);
    const double d0 = distance(u.vec(), layout.positions[0]);
    const std::complex<double> h0 =
        std::polar(1.0 / d0, wrap_phase(-kTwoPi / cfg.free_space_wavelength() * d0));
    CHECK_THAT(std::abs(ch[0] - h0), WithinAbs(0.0, 1e-12));

    // Every other antenna picks up 2*pi/lambda_g times its feed distance.
    for (int n = 1; n < cfg.n_antennas; ++n) {
        const double dn = distance(u.vec(), layout.positions[static_cast<std::size_t>(n)]);
        const double expected = wrap_phase(-kTwoPi / cfg.free_space_wavelength() * dn -
                                           kTwoPi / cfg.guided_wavelength() * layout.waveguide_distance(n));
        CHECK_THAT(ch.phase(n), WithinAbs(expected, 1e-9));
        CHECK_THAT(ch.magnitude(n), WithinRel(1.0 / dn, 1e-12));
    }
}

TEST_CASE("channel rejects degenerate geometry", "[channel]") {
    SystemConfig cfg;
    cfg.n_antennas = 2;
    auto layout = antenna_positions(cfg);
    UserPosition at_antenna{layout.positions[0].x, 0.0, cfg.antenna_height_m};
    CHECK_THROWS_AS(compute_channel(cfg, layout, at_antenna), std::invalid_argument);
}

TEST_CASE("snr of simple activations", "[channel]") {
    SystemConfig cfg;
    const double rho = cfg.transmit_snr_linear();

    ChannelVector single({std::polar(0.25, 1.0)});
    CHECK_THAT(evaluate_snr(cfg, single, bits({1})), WithinRel(rho * 0.0625, 1e-12));

    const std::complex<double> b{0.3, 0.4};
    ChannelVector pair_same({b, b});
    CHECK_THAT(evaluate_snr(cfg, pair_same, bits({1, 1})),
               WithinRel(2.0 * rho * std::norm(b), 1e-12));

    ChannelVector pair_opposite({b, -b});
    CHECK_THAT(evaluate_snr(cfg, pair_opposite, bits({1, 1})), WithinAbs(0.0, 1e-20));

    CHECK_THROWS_AS(evaluate_snr(cfg, pair_same, bits({0, 0})), std::invalid_argument);
}

TEST_CASE("achievable rate", "[channel]") {
    CHECK(achievable_rate(0.0) == 0.0);
    CHECK_THAT(achievable_rate(1.0), WithinRel(1.0, 1e-15));
    CHECK_THAT(achievable_rate(3.0), WithinRel(2.0, 1e-15));
    CHECK_THROWS_AS(achievable_rate(-1e-9), std::invalid_argument);
}

TEST_CASE("q matrix of orthogonal phasors is the identity", "[channel]") {
    ChannelVector ch({{1.0, 0.0}, {0.0, 1.0}});
    auto q = build_q(ch);
    CHECK(q.at(0, 0) == 1.0);
    CHECK(q.at(1, 1) == 1.0);
    CHECK(q.at(0, 1) == 0.0);
    CHECK(q.at(1, 0) == 0.0);
}

TEST_CASE("real channel gives rank-one outer product", "[channel]") {
    ChannelVector ch({{2.0, 0.0}, {3.0, 0.0}, {-1.0, 0.0}});
    auto q = build_q(ch);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK_THAT(q.at(i, j), WithinAbs(ch[i].real() * ch[j].real(), 1e-15));
}

TEST_CASE("quadratic form matches the coherent power", "[channel]") {
    CounterRng rng(2024);
    SystemConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        auto ch = testutil::random_channel(12, rng, static_cast<std::uint64_t>(trial));
        auto q = build_q(ch);
        auto pick = rng.derive(1000 + static_cast<std::uint64_t>(trial));
        std::vector<std::uint8_t> b(12);
        for (int i = 0; i < 12; ++i) b[static_cast<std::size_t>(i)] = pick.bits(static_cast<std::uint64_t>(i)) & 1;
        ActivationVector a(std::move(b));
        const double direct = std::norm(active_sum(ch, a));
        CHECK_THAT(quad_form(q, a), WithinAbs(direct, 1e-10 * std::max(1.0, direct)));
        if (a.n_active() > 0) {
            const double via_q = cfg.transmit_snr_linear() / a.n_active() * quad_form(q, a);
            CHECK_THAT(evaluate_snr(cfg, ch, a), WithinRel(via_q, 1e-9));
        }
    }
}

TEST_CASE("global phase rotation changes nothing", "[channel]") {
    CounterRng rng(77);
    SystemConfig cfg;
    for (int trial = 0; trial < 50; ++trial) {
        auto ch = testutil::random_channel(10, rng, static_cast<std::uint64_t>(trial));
        const double phi = rng.derive(9).uniform(static_cast<std::uint64_t>(trial), -kPi, kPi);
        std::vector<std::complex<double>> rotated;
        for (int i = 0; i < ch.size(); ++i) rotated.push_back(ch[i] * std::polar(1.0, phi));
        ChannelVector ch_rot(std::move(rotated));

        auto pick = rng.derive(8).derive(static_cast<std::uint64_t>(trial));
        std::vector<std::uint8_t> b(10);
        bool any = false;
        for (int i = 0; i < 10; ++i) {
            b[static_cast<std::size_t>(i)] = pick.bits(static_cast<std::uint64_t>(i)) & 1;
            any |= b[static_cast<std::size_t>(i)] != 0;
        }
        if (!any) b[0] = 1;
        ActivationVector a(std::move(b));

        const double s0 = evaluate_snr(cfg, ch, a);
        const double s1 = evaluate_snr(cfg, ch_rot, a);
        CHECK_THAT(s1, WithinRel(s0, 1e-10));

        auto q0 = build_q(ch);
        auto q1 = build_q(ch_rot);
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j)
                CHECK_THAT(q1.at(i, j), WithinAbs(q0.at(i, j), 1e-10));
    }
}

TEST_CASE("mirrored user sees mirrored magnitudes", "[channel]") {
    SystemConfig cfg;
    cfg.n_antennas = 9;
    auto layout = antenna_positions(cfg);
    CounterRng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto u = testutil::random_user(cfg, rng, static_cast<std::uint64_t>(trial));
        UserPosition mirrored{-u.x, u.y, u.z};
        auto ch = compute_channel(cfg, layout, u);
        auto chm = compute_channel(cfg, layout, mirrored);
        for (int n = 0; n < cfg.n_antennas; ++n)
            CHECK_THAT(chm.magnitude(cfg.n_antennas - 1 - n), WithinAbs(ch.magnitude(n), 1e-12));
    }
}

TEST_CASE("conventional baseline", "[channel]") {
    SystemConfig cfg;
    const double rho = cfg.transmit_snr_linear();
    UserPosition u{0.0, 4.0, 0.0};  // exactly 5 m from (0, 0, 3)

    // Per-antenna share matches a single co-located antenna.
    const double per_antenna = conventional_baseline_snr(cfg, u) / cfg.n_antennas;
    ChannelVector colocated({std::polar(1.0 / 5.0, 0.123)});
    CHECK_THAT(per_antenna, WithinRel(evaluate_snr(cfg, colocated, bits({1})), 1e-12));

    SystemConfig doubled = cfg;
    doubled.n_antennas = cfg.n_antennas * 2;
    CHECK_THAT(conventional_baseline_snr(doubled, u),
               WithinRel(2.0 * conventional_baseline_snr(cfg, u), 1e-12));

    SystemConfig big = cfg;
    big.n_antennas = 500;
    CHECK_THAT(conventional_baseline_snr(big, u), WithinRel(2.0e5, 1e-12));
    CHECK_THAT(db_from_linear(conventional_baseline_snr(big, u)), WithinAbs(53.0103, 1e-4));
}
