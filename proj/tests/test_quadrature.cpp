#include "certheat/quadrature.hpp"
#include "certheat/vocab.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace certheat;

namespace {

bool near(const Ball& b, double truth, double slack = 1e-13) {
    return std::abs(b.mid.to_double() - truth) <= b.rad.to_double() + slack;
}

// sqrt on [0,1]: Hoelder-1/2, so |x-y| <= 4^-k keeps the values within 2^-k
EvaluableFunction sqrt_fn() {
    auto eval = [](std::span<const Dyadic> pt, long p) {
        return settle_with([&](long w) { return sqrt(Ball(pt[0]), w); }, p);
    };
    return EvaluableFunction({Interval{0, 1}}, eval, [](long k) { return 2 * k; }, Rational(1));
}

}  // namespace

TEST_CASE("band-limited integrands are integrated exactly") {
    auto g = trig_polynomial({rat(3), rat(0), rat(1)}, {rat(0), rat(0), rat(0), rat(0), rat(0), rat(1)});
    QuadraturePlan plan;
    Ball v = integrate(g, 30, {}, &plan);
    CHECK(near(v, 6 * std::numbers::pi));
    CHECK(v.rad <= Dyadic::pow2(-30));
    CHECK(plan.segments.size() == 1);
    CHECK(plan.segments[0].rule == "band-limited");
    CHECK(plan.segments[0].error[0] == 0);
}

TEST_CASE("polynomial and piecewise-linear integrals") {
    Ball v = integrate(polynomial({rat(0), rat(0), rat(1)}, 0, 1), 24);
    CHECK(v.contains(rat(1, 3)));
    CHECK(v.rad <= Dyadic::pow2(-24));

    QuadraturePlan plan;
    Ball tent = integrate(piecewise_linear({{0, 0}, {rat(1, 3), 1}, {1, 0}}), 30, {}, &plan);
    CHECK(tent.contains(rat(1, 2)));
    CHECK(plan.segments.size() == 2);
    CHECK(plan.evaluations() == 2);  // the midpoint rule is exact on each linear piece
}

TEST_CASE("weighted integrals against closed forms") {
    // int_0^1 x^2 cos(3x) dx and int_0^1 x^2 sin(3x) dx
    auto f = polynomial({rat(0), rat(0), rat(1)}, 0, 1);
    WeightFamily w = [](const Ball& x, long p) {
        auto [c, s] = cos_sin(mul(x, Rational(3), p + 4), p);
        return std::vector<Ball>{c, s};
    };
    WeightBounds b{1, 3, 9, std::nullopt};
    auto parts = integrate(f, w, {b, b}, {20, 26});
    double c = (9 * std::sin(3.0) + 6 * std::cos(3.0) - 2 * std::sin(3.0)) / 27;
    double s = (-9 * std::cos(3.0) + 6 * std::sin(3.0) + 2 * std::cos(3.0) - 2) / 27;
    CHECK(near(parts[0], c));
    CHECK(near(parts[1], s));
    CHECK(parts[0].rad <= Dyadic::pow2(-20));
    CHECK(parts[1].rad <= Dyadic::pow2(-26));
}

TEST_CASE("modulus-only integrand") {
    QuadraturePlan plan;
    Ball v = integrate(sqrt_fn(), 6, {}, &plan);
    CHECK(v.contains(rat(2, 3)));
    CHECK(v.rad <= Dyadic::pow2(-6));
    CHECK(plan.segments[0].rule == "modulus");
}

TEST_CASE("budget exhaustion is reported") {
    QuadratureOptions opts;
    opts.max_log2 = 4;
    CHECK_THROWS_AS(integrate(sqrt_fn(), 20, opts), QuadratureBudgetError);
}

TEST_CASE("bits_above") {
    CHECK(bits_above(rat(1, 2)) == 0);
    CHECK(bits_above(1) == 0);
    CHECK(bits_above(2) == 1);
    CHECK(bits_above(rat(5, 2)) == 2);
}
