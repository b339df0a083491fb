#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "pinch/solver.hpp"
#include "test_util.hpp"

using namespace pinch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("brute force on coherent and cancelling pairs", "[solver]") {
    ChannelVector coherent({{1.0, 0.0}, {1.0, 0.0}});
    auto s = brute_force(coherent);
    CHECK(s.activation.bitstring() == "11");
    CHECK_THAT(s.objective, WithinRel(2.0, 1e-12));

    ChannelVector cancelling({{1.0, 0.0}, {-1.0, 0.0}});
    auto t = brute_force(cancelling);
    CHECK(t.activation.bitstring() == "10");  // tie with "01" broken toward antenna 0
    CHECK_THAT(t.objective, WithinRel(1.0, 1e-12));
}

TEST_CASE("brute force on balanced three-phasor", "[solver]") {
    const double s3 = std::sqrt(3.0) / 2.0;
    ChannelVector ch({{1.0, 0.0}, {-0.5, s3}, {-0.5, -s3}});
    // Exhaustive oracle: singletons 1, pairs 1/2, triple 0.
    CHECK_THAT(testutil::oracle_max_ratio(ch), WithinAbs(1.0, 1e-12));
    auto s = brute_force(ch);
    CHECK_THAT(s.objective, WithinAbs(1.0, 1e-12));
    CHECK(s.activation.n_active() == 1);
    CHECK(s.activation.bitstring() == "100");
}

TEST_CASE("brute force refuses exponential sizes", "[solver]") {
    std::vector<std::complex<double>> gains(26, {1.0, 0.0});
    ChannelVector ch(std::move(gains));
    CHECK_THROWS_WITH(brute_force(ch), Catch::Matchers::ContainsSubstring("N > 25"));
}

TEST_CASE("parametric subproblem basics", "[solver]") {
    ChannelVector coherent({{1.0, 0.0}, {1.0, 0.0}});
    CHECK(subproblem_exact(coherent, 0.0).bitstring() == "11");

    // Penalty above any achievable ratio forces the empty activation.
    CHECK(subproblem_exact(coherent, 10.0).n_active() == 0);
    CHECK_THROWS_AS(subproblem_exact(coherent, -1.0), std::invalid_argument);
}

TEST_CASE("parametric subproblem matches exhaustive enumeration", "[solver]") {
    CounterRng rng(101);
    double maxerr = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        auto ch = testutil::random_channel(12, rng, static_cast<std::uint64_t>(trial));
        double maxb = 0.0;
        for (int i = 0; i < ch.size(); ++i) maxb = std::max(maxb, std::norm(ch[i]));
        const double lambda =
            rng.derive(4).uniform(static_cast<std::uint64_t>(trial), 0.0, 2.0 * maxb);

        const double expected = testutil::oracle_subproblem_value(ch, lambda);
        auto a = subproblem_exact(ch, lambda);
        const double got =
            (a.n_active() > 0) ? std::norm(active_sum(ch, a)) - lambda * a.n_active() : 0.0;
        maxerr = std::max(maxerr, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
    }
    CHECK(maxerr < 1e-9);
}

TEST_CASE("angle sweep equals brute force on random instances", "[solver]") {
    CounterRng rng(555);
    for (int trial = 0; trial < 200; ++trial) {
        auto ch = testutil::random_channel(12, rng, static_cast<std::uint64_t>(trial));
        auto bf = brute_force(ch);
        auto sw = angle_sweep_max_ratio(ch);
        CHECK_THAT(sw.objective, WithinRel(bf.objective, 1e-9));
    }

    ChannelVector coherent({{1.0, 0.0}, {1.0, 0.0}});
    CHECK_THAT(angle_sweep_max_ratio(coherent).objective, WithinRel(2.0, 1e-12));
    CHECK(angle_sweep_max_ratio(coherent).activation.bitstring() == "11");
}

TEST_CASE("angle sweep handles degenerate tie structures", "[solver]") {
    // Identical gains never cross; mirror-symmetric gains cross simultaneously.
    for (auto gains : {std::vector<std::complex<double>>{{1, 0}, {1, 0}, {1, 0}},
                       std::vector<std::complex<double>>{{1, 0}, {1, 0}, {-1, 0}},
                       std::vector<std::complex<double>>{{1, 0}, {-1, 0}, {0, 1}, {0, -1}},
                       std::vector<std::complex<double>>{{0.5, 0.5}, {0.5, -0.5}, {-0.5, 0.5}, {-0.5, -0.5}}}) {
        ChannelVector ch(std::move(gains));
        auto sw = angle_sweep_max_ratio(ch);
        CHECK_THAT(sw.objective, WithinRel(testutil::oracle_max_ratio(ch), 1e-12));
    }

    ChannelVector single(std::vector<std::complex<double>>{{0.3, 0.4}});
    CHECK_THAT(angle_sweep_max_ratio(single).objective, WithinRel(0.25, 1e-12));
}

TEST_CASE("dinkelbach hand trace from lambda zero", "[solver]") {
    ChannelVector coherent({{1.0, 0.0}, {1.0, 0.0}});
    DinkelbachConfig cfg;
    cfg.initial_lambda = 0.0;

    // First subproblem maximizes |a^T B|^2 outright: full activation, value 4.
    auto first = subproblem_exact(coherent, 0.0);
    CHECK(first.bitstring() == "11");
    CHECK_THAT(std::norm(active_sum(coherent, first)), WithinRel(4.0, 1e-12));

    auto s = dinkelbach(coherent, cfg);
    CHECK(s.iterations == 2);
    REQUIRE(s.lambda_trace.size() == 2);
    CHECK(s.lambda_trace[0] == 0.0);
    CHECK_THAT(s.lambda_trace[1], WithinRel(2.0, 1e-12));
    CHECK_THAT(s.objective, WithinRel(2.0, 1e-12));
    CHECK(s.activation.bitstring() == "11");
}

TEST_CASE("dinkelbach converges immediately on a singleton", "[solver]") {
    ChannelVector single(std::vector<std::complex<double>>{{0.6, 0.8}});
    auto s = dinkelbach(single);
    CHECK(s.iterations <= 2);
    CHECK_THAT(s.objective, WithinRel(1.0, 1e-12));
    CHECK(s.activation.bitstring() == "1");
}

TEST_CASE("dinkelbach agrees with brute force and certifies optimality", "[solver]") {
    CounterRng rng(9001);
    for (int trial = 0; trial < 200; ++trial) {
        auto ch = testutil::random_channel(12, rng, static_cast<std::uint64_t>(trial));
        auto bf = brute_force(ch);
        auto dk = dinkelbach(ch);
        CHECK_THAT(dk.objective, WithinRel(bf.objective, 1e-9));

        // Trace strictly increasing, final value equals the objective.
        for (std::size_t i = 1; i < dk.lambda_trace.size(); ++i)
            CHECK(dk.lambda_trace[i] > dk.lambda_trace[i - 1]);
        CHECK_THAT(dk.lambda_trace.back(), WithinAbs(dk.objective, 1e-9));

        // Optimality certificate at the returned lambda.
        auto cert = subproblem_exact(ch, dk.objective);
        const double cert_val = (cert.n_active() > 0)
                                    ? std::norm(active_sum(ch, cert)) - dk.objective * cert.n_active()
                                    : 0.0;
        CHECK(cert_val <= 1e-9);
    }
}

TEST_CASE("cross-solver agreement at N=200", "[solver][.slow]") {
    CounterRng rng(311);
    for (int trial = 0; trial < 20; ++trial) {
        auto ch = testutil::random_channel(200, rng, static_cast<std::uint64_t>(trial));
        auto sw = angle_sweep_max_ratio(ch);
        auto dk = dinkelbach(ch);
        CHECK_THAT(sw.objective, WithinRel(dk.objective, 1e-9));
    }
}

TEST_CASE("scaling the channel rescales the objective, not the argmax", "[solver]") {
    CounterRng rng(246);
    for (int trial = 0; trial < 40; ++trial) {
        auto ch = testutil::random_channel(10, rng, static_cast<std::uint64_t>(trial));
        auto base = angle_sweep_max_ratio(ch);
        for (double s : {2.0, 0.5, 4.0}) {
            std::vector<std::complex<double>> scaled;
            for (int i = 0; i < ch.size(); ++i) scaled.push_back(ch[i] * s);
            auto sol = angle_sweep_max_ratio(ChannelVector(std::move(scaled)));
            CHECK(sol.activation == base.activation);
            CHECK_THAT(sol.objective, WithinRel(base.objective * s * s, 1e-12));
        }
    }
}

TEST_CASE("solution bookkeeping is consistent", "[solver]") {
    CounterRng rng(8);
    auto ch = testutil::random_channel(8, rng, 0);
    const double rho = 1.0e4;
    auto s = angle_sweep_max_ratio(ch, rho);
    CHECK_THAT(s.objective, WithinRel(s.snr / rho, 1e-9));
    CHECK_THAT(s.rate, WithinRel(std::log2(1.0 + s.snr), 1e-12));
    CHECK(s.activation.n_active() >= 1);

    // Re-running reproduces the identical activation (deterministic ties).
    auto again = angle_sweep_max_ratio(ch, rho);
    CHECK(again.activation == s.activation);
}

TEST_CASE("dinkelbach surfaces iteration-limit failures with the trace", "[solver]") {
    ChannelVector ch({{1.0, 0.0}, {0.9, 0.1}, {0.2, 0.7}});
    DinkelbachConfig cfg;
    cfg.initial_lambda = 0.0;
    cfg.max_iterations = 1;
    try {
        dinkelbach(ch, cfg);
        FAIL("expected dinkelbach_error");
    } catch (const dinkelbach_error& e) {
        CHECK(!e.lambda_trace.empty());
    }
}
