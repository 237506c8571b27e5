#include "certheat/hardness.hpp"
#include "certheat/quadrature.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace certheat;

namespace {

Rational exact_integral(const CountingInstance& inst) {
    return integrate(counting_integrand(inst), 2 * inst.n_vars() + 20).mid.to_rational();
}

CertifiedValue ball_value(const Rational& mid, long err_bits) {
    return CertifiedValue::from_ball(Ball(round_nearest(mid, err_bits + 4), Dyadic::pow2(-err_bits - 1)), err_bits);
}

}  // namespace

TEST_CASE("brute-force subset-sum counts") {
    CHECK(brute_force_count({{1}, 1}) == 1);
    CHECK(brute_force_count({{1, 2}, 3}) == 1);
    CHECK(brute_force_count({{1, 1, 1}, 2}) == 3);
    CHECK(brute_force_count({{2, 4}, 5}) == 0);
    CHECK_THROWS_AS(brute_force_count({{1, 0}, 1}), PreconditionError);
    CHECK_THROWS_AS(brute_force_count({{1}, 0}), PreconditionError);
}

TEST_CASE("counting integrand integrates to count times 4^-n_vars") {
    CHECK(exact_integral({{1}, 1}) == Rational(1, 4));
    CHECK(exact_integral({{1, 2}, 3}) == Rational(1, 16));
    CHECK(exact_integral({{2, 4}, 5}) == 0);
    std::mt19937_64 rng(11);
    for (long nv = 1; nv <= 8; ++nv) {
        auto inst = random_instance(nv, rng);
        CHECK(exact_integral(inst) == counting_integral(inst));
    }
}

TEST_CASE("counting integrand places a tent on accepted cells only") {
    CountingInstance inst{{1, 2}, 3};  // only y = 11 (cell 3) accepts
    auto f = counting_integrand(inst);
    CHECK(f(Dyadic(7, -3), 40) == Dyadic(1, -1));  // midpoint of [3/4, 1], height 2^(1-2)
    CHECK(f(Dyadic(13, -4), 40) == Dyadic(1, -2));
    CHECK(f(Dyadic(1), 40).is_zero());
    CHECK(f(Dyadic(3, -2), 40).is_zero());
    CHECK(f(Dyadic(1, -1), 40).is_zero());
    CHECK(f(Dyadic(3, -3), 40).is_zero());
}

TEST_CASE("one verifier call per evaluation") {
    auto calls = std::make_shared<std::atomic<long>>(0);
    std::mt19937_64 rng(3);
    auto f = counting_integrand(random_instance(6, rng), calls);
    for (long i = 0; i <= 100; ++i) (void)f(Dyadic(i, 0) * Dyadic(1, -7) + Dyadic(1, -9), 30);
    CHECK(calls->load() == 101);
}

TEST_CASE("recovering counts from certified values") {
    CountingInstance two{{1, 2}, 3};
    CHECK(recover_count(ball_value(Rational(1, 16), 40), two) == 1);
    CHECK(recover_count(ball_value(0, 40), two) == 0);
    CHECK(recover_count(ball_value(Rational(3, 16) - Rational(1, 128), 6), two) == 3);
    CHECK_THROWS_AS(recover_count(CertifiedValue::from_ball(Ball(0), 4), two), InsufficientPrecision);
    CHECK_NOTHROW(recover_count(CertifiedValue::from_ball(Ball(0), 6), two));
}

TEST_CASE("pipelines recover brute-force counts and agree") {
    std::mt19937_64 rng(2024);
    for (long nv = 1; nv <= 7; ++nv) {
        auto inst = random_instance(nv, rng);
        long truth = brute_force_count(inst);
        for (auto p : {Pipeline::neumann, Pipeline::disk, Pipeline::interval}) {
            auto r = run_pipeline(inst, p);
            CHECK_MESSAGE(r.count == truth, to_string(p) << " n_vars=" << nv);
            CHECK(r.precision_bits == 2 * nv + 2);
            CHECK(r.integral.encloses(counting_integral(inst)));
        }
    }
    CountingInstance none{{2, 4, 6}, 5};
    for (auto p : {Pipeline::neumann, Pipeline::disk, Pipeline::interval}) CHECK(run_pipeline(none, p).count == 0);
}

TEST_CASE("neumann pipeline is exact up to ten variables") {
    std::mt19937_64 rng(99);
    for (long nv = 8; nv <= 10; ++nv) {
        auto inst = random_instance(nv, rng);
        CHECK(run_pipeline(inst, Pipeline::neumann).count == brute_force_count(inst));
    }
}

TEST_CASE("blowup records and CSV") {
    std::ostringstream empty;
    write_csv(empty, measure_blowup({}, Pipeline::neumann));
    CHECK(empty.str() == "pipeline,n_vars,precision_bits,wall_ms,value,count,ok\n");

    std::mt19937_64 rng(5);
    std::vector<CountingInstance> family{random_instance(3, rng), random_instance(4, rng)};
    auto recs = measure_blowup(family, Pipeline::disk, 3);
    REQUIRE(recs.size() == 2);
    for (const auto& r : recs) {
        CHECK(r.ok);
        CHECK(r.wall_ms > 0);
        CHECK(r.count >= 0);
        CHECK(r.count <= (1L << r.n_vars));
        CHECK(r.error.empty());
    }
    std::ostringstream csv;
    write_csv(csv, recs);
    CHECK(csv.str().find("\ndisk,3,8,") != std::string::npos);
}

TEST_CASE("pipeline names and the size cap") {
    CHECK(parse_pipeline("interval") == Pipeline::interval);
    CHECK(to_string(parse_pipeline("neumann")) == "neumann");
    CHECK_THROWS_AS(parse_pipeline("sphere"), PreconditionError);
    ::setenv("CERTHEAT_MAX_VARS", "3", 1);
    CHECK(max_vars() == 3);
    CHECK_THROWS_AS(counting_integrand({{1, 1, 1, 1}, 2}), PreconditionError);
    ::setenv("CERTHEAT_MAX_VARS", "zero", 1);
    CHECK_THROWS_AS(max_vars(), PreconditionError);
    ::unsetenv("CERTHEAT_MAX_VARS");
    CHECK(max_vars() == 24);
}
