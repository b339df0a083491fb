#include <catch2/catch_amalgamated.hpp>

#include "pinch/autodiff.hpp"
#include "pinch/rng.hpp"

using namespace pinch;
using ad::Tensor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> random_vec(std::size_t n, const CounterRng& rng, double lo = -1.0,
                               double hi = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(i, lo, hi);
    return v;
}

// Central finite differences against the analytic gradient for a scalar
// function of the given parameter tensors.
template <typename BuildFn>
void check_gradients(std::vector<Tensor>& params, BuildFn&& build, double tol = 1e-4) {
    Tensor out = build(params);
    REQUIRE(out.size() == 1);
    out.backward();

    const double h = 1e-5;
    for (auto& p : params) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p.value()[i];
            p.mutable_value()[i] = saved + h;
            const double up = build(params).scalar();
            p.mutable_value()[i] = saved - h;
            const double down = build(params).scalar();
            p.mutable_value()[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = p.grad()[i];
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-3});
            INFO("coordinate " << i << ": analytic " << an << " vs fd " << fd);
            REQUIRE(std::abs(fd - an) / denom < tol);
        }
    }
}

}  // namespace

TEST_CASE("activation values and derivatives at reference points", "[autodiff]") {
    auto x = Tensor::param(1, 3, {0.0, -1.0, 2.0});

    auto s = ad::sigmoid(x);
    CHECK_THAT(s.value()[0], WithinAbs(0.5, 1e-15));
    ad::sum_all(s).backward();
    CHECK_THAT(x.grad()[0], WithinAbs(0.25, 1e-12));  // sigmoid'(0)

    auto y = Tensor::param(1, 3, {0.0, -1.0, 2.0});
    auto r = ad::relu(y);
    CHECK(r.value()[1] == 0.0);
    CHECK(r.value()[2] == 2.0);
    ad::sum_all(r).backward();
    CHECK(y.grad()[1] == 0.0);
    CHECK(y.grad()[2] == 1.0);
}

TEST_CASE("shape errors and non-scalar backward are rejected", "[autodiff]") {
    auto a = Tensor::param(2, 2, {1, 2, 3, 4});
    auto b = Tensor::param(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(ad::add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(ad::mul(a, b), std::invalid_argument);
    CHECK_THROWS_AS(ad::linear(a, b), std::invalid_argument);
    CHECK_THROWS_AS(a.backward(), std::invalid_argument);
    CHECK_THROWS_AS(ad::segment_sum(a, 3), std::invalid_argument);
}

TEST_CASE("shared subexpressions accumulate gradient", "[autodiff]") {
    auto x = Tensor::param(1, 1, {3.0});
    auto y = ad::mul(x, x);  // d/dx x^2 = 2x
    y.backward();
    CHECK_THAT(x.grad()[0], WithinAbs(6.0, 1e-12));
}

TEST_CASE("three-layer composition matches finite differences", "[autodiff]") {
    CounterRng rng(1234);
    for (int seed = 0; seed < 5; ++seed) {
        auto base = rng.derive(static_cast<std::uint64_t>(seed));
        std::vector<Tensor> params;
        params.push_back(Tensor::param(4, 3, random_vec(12, base.derive(0))));   // W1
        params.push_back(Tensor::param(1, 4, random_vec(4, base.derive(1))));    // b1
        params.push_back(Tensor::param(2, 4, random_vec(8, base.derive(2))));    // W2
        params.push_back(Tensor::param(1, 2, random_vec(2, base.derive(3))));    // b2
        params.push_back(Tensor::param(1, 2, random_vec(2, base.derive(4))));    // W3
        auto x = Tensor::constant(5, 3, random_vec(15, base.derive(5)));

        check_gradients(params, [&](std::vector<Tensor>& p) {
            auto h1 = ad::relu(ad::linear(x, p[0], p[1]));
            auto h2 = ad::tanh_op(ad::linear(h1, p[2], p[3]));
            auto out = ad::linear(h2, p[4]);
            return ad::sum_all(ad::sigmoid(out));
        });
    }
}

TEST_CASE("reduction and shape ops match finite differences", "[autodiff]") {
    CounterRng rng(777);
    auto base = rng.derive(0);
    std::vector<Tensor> params;
    params.push_back(Tensor::param(6, 3, random_vec(18, base.derive(0))));
    params.push_back(Tensor::param(2, 3, random_vec(6, base.derive(1))));
    params.push_back(Tensor::param(6, 1, random_vec(6, base.derive(2), 0.1, 0.9)));

    check_gradients(params, [&](std::vector<Tensor>& p) {
        auto pooled = ad::concat_cols(ad::segment_mean(p[0], 3), ad::segment_max(p[0], 3));
        auto spread = ad::repeat_rows(p[1], 3);
        auto dots = ad::row_dot(spread, p[0]);
        auto scaled = ad::scale_rows(p[0], ad::sigmoid(dots));
        auto mixed = ad::mul(pooled, ad::concat_cols(p[1], p[1]));
        auto extra = ad::div(ad::softplus(dots), ad::add_scalar(ad::mul(p[2], p[2]), 1.0));
        return ad::add(ad::sum_all(ad::segment_sum(scaled, 3)),
                       ad::add(ad::sum_all(mixed), ad::sum_all(extra)));
    });
}

TEST_CASE("log and clamp gradients away from the pin boundary", "[autodiff]") {
    std::vector<Tensor> params{Tensor::param(1, 4, {0.2, 0.5, 0.8, 0.4})};
    check_gradients(params, [&](std::vector<Tensor>& p) {
        return ad::sum_all(ad::log_op(ad::clamp(p[0], 1e-12, 1.0 - 1e-12)));
    });

    // Pinned values receive zero gradient.
    auto x = Tensor::param(1, 2, {-0.5, 1.5});
    ad::sum_all(ad::clamp(x, 0.0, 1.0)).backward();
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 0.0);
}

TEST_CASE("segment reductions compute what they claim", "[autodiff]") {
    auto x = Tensor::constant(4, 2, {1, 2, 3, 4, 5, 6, 7, 8});
    auto s = ad::segment_sum(x, 2);
    CHECK(s.value_copy() == std::vector<double>{4, 6, 12, 14});
    auto m = ad::segment_mean(x, 2);
    CHECK(m.value_copy() == std::vector<double>{2, 3, 6, 7});
    auto mx = ad::segment_max(x, 2);
    CHECK(mx.value_copy() == std::vector<double>{3, 4, 7, 8});
    auto rep = ad::repeat_rows(Tensor::constant(2, 1, {9, 11}), 2);
    CHECK(rep.value_copy() == std::vector<double>{9, 9, 11, 11});
    CHECK(ad::mean_over_rows(x).value_copy() == std::vector<double>{4, 5});
    CHECK(ad::max_over_rows(x).value_copy() == std::vector<double>{7, 8});
}
