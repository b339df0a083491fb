#include <catch2/catch_amalgamated.hpp>

#include "pinch/metrics.hpp"
#include "test_util.hpp"

using namespace pinch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
SystemConfig small_config() {
    SystemConfig cfg;
    cfg.n_antennas = 10;
    return cfg;
}
}  // namespace

TEST_CASE("replaying the labels scores perfectly", "[metrics]") {
    auto ds = generate_dataset(small_config(), 30, 1);
    auto m = evaluate(label_policy(), ds);
    CHECK_THAT(m.snr_accuracy, WithinRel(1.0, 1e-12));
    CHECK_THAT(m.rate_accuracy, WithinRel(1.0, 1e-12));
    CHECK_THAT(m.bitwise_accuracy, WithinRel(1.0, 1e-12));
    CHECK_THAT(m.activation_ratio_model, WithinRel(m.activation_ratio_optimal, 1e-12));
    CHECK(m.fallback_count == 0);
    CHECK(m.n_instances == 30);
}

TEST_CASE("no policy can beat the labels", "[metrics]") {
    auto ds = generate_dataset(small_config(), 40, 2);
    CounterRng rng(5);
    auto random_policy = [&rng](const InstanceRecord& rec) {
        auto stream = rng.derive(rec.index);
        std::vector<double> p(rec.magnitudes.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = stream.uniform01(i);
        return p;
    };
    auto m = evaluate(random_policy, ds);
    CHECK(m.snr_accuracy <= 1.0 + 1e-9);
    CHECK(m.snr_accuracy > 0.0);
}

TEST_CASE("the all-zeros policy falls back to a singleton", "[metrics]") {
    auto ds = generate_dataset(small_config(), 20, 3);
    auto zeros = [](const InstanceRecord& rec) {
        return std::vector<double>(rec.magnitudes.size(), 0.0);
    };
    auto m = evaluate(zeros, ds);
    CHECK(m.fallback_count == 20);
    CHECK(m.snr_accuracy > 0.0);
    CHECK_THAT(m.activation_ratio_model, WithinRel(0.1, 1e-12));  // 1 of 10 antennas
}

TEST_CASE("strict threshold boundary", "[metrics]") {
    std::vector<double> probs{0.5, 0.7, 0.5};
    auto a = threshold_activation(probs, 0.5);
    CHECK(a.bitstring() == "010");  // 0.5 is not > 0.5

    bool fallback = false;
    auto b = threshold_activation({0.2, 0.4, 0.4}, 0.5, &fallback);
    CHECK(fallback);
    CHECK(b.bitstring() == "010");  // first argmax
}

TEST_CASE("nearest policy underperforms the optimum", "[metrics]") {
    SystemConfig cfg;
    cfg.n_antennas = 40;
    auto ds = generate_dataset(cfg, 30, 4);
    auto m = evaluate(nearest_policy(cfg), ds);
    CHECK(m.snr_accuracy < 0.6);  // far from optimal even at moderate N
    CHECK(m.snr_accuracy > 0.0);
    CHECK_THAT(m.activation_ratio_model, WithinRel(m.activation_ratio_optimal, 1e-12));
}

TEST_CASE("length mismatches are rejected", "[metrics]") {
    auto ds = generate_dataset(small_config(), 3, 5);
    auto bad = [](const InstanceRecord&) { return std::vector<double>(4, 0.5); };
    CHECK_THROWS_AS(evaluate(bad, ds), std::invalid_argument);
}
