#include "certheat/series.hpp"

#include <doctest.h>

using namespace certheat;

namespace {

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// sum_{k=m}^{m+terms-1} x^k (k+p)!/k!
Rational partial_sum(long m, long p, const Rational& x, long terms) {
    Rational s = 0, xk = pow(x, m);
    for (long k = m; k < m + terms; ++k) {
        Rational rising = 1;
        for (long j = 1; j <= p; ++j) rising *= k + j;
        s += xk * rising;
        xk *= x;
    }
    return s;
}

// tail after `terms` terms: the ratio of consecutive terms is at most |x|(K+p+1)/(K+1) past K
Rational tail_bound(long m, long p, const Rational& x, long terms) {
    long K = m + terms;
    Rational rising = 1;
    for (long j = 1; j <= p; ++j) rising *= K + j;
    Rational ratio = absr(x) * Rational(K + p + 1) / (K + 1);
    REQUIRE(ratio < 1);
    return absr(pow(x, K)) * rising / (1 - ratio);
}

}  // namespace

TEST_CASE("arith_geom_sum examples") {
    CHECK(arith_geom_sum(0, rat(1, 2)) == 4);
    CHECK(arith_geom_sum(1, rat(1, 2)) == 3);
    CHECK(arith_geom_sum(0, 0) == 1);
    CHECK(absr(arith_geom_sum(0, rat(1, 2)) - partial_sum(0, 1, rat(1, 2), 80)) < rat(1, 1000000000000000LL));
    CHECK_THROWS_AS(arith_geom_sum(0, 1), PreconditionError);
    CHECK_THROWS_AS(arith_geom_sum(2, -1), PreconditionError);
}

TEST_CASE("higher_arith_geom examples") {
    CHECK(higher_arith_geom(0, 0, rat(1, 2)) == 2);
    CHECK(higher_arith_geom(0, 1, rat(1, 2)) == 4);
    Rational v = higher_arith_geom(3, 2, rat(1, 3));
    Rational s = partial_sum(3, 2, rat(1, 3), 60);
    CHECK(v >= s);
    CHECK(v - s <= tail_bound(3, 2, rat(1, 3), 60));
    CHECK(v - s < rat(1, 1000000000000000LL));
    CHECK_THROWS_AS(higher_arith_geom(0, 2, rat(-3, 2)), PreconditionError);
}

TEST_CASE("higher_arith_geom agrees with partial sums") {
    for (long p = 0; p <= 5; ++p)
        for (long m = 0; m <= 6; ++m)
            for (Rational x : {rat(1, 2), rat(-1, 3), rat(2, 5), rat(7, 10), rat(0)}) {
                long terms = 200;
                Rational s = partial_sum(m, p, x, terms);
                Rational v = higher_arith_geom(m, p, x);
                CHECK(absr(v - s) <= tail_bound(m, p, x, terms));
            }
}

TEST_CASE("p = 1 identity") {
    for (long m = 0; m <= 12; ++m)
        for (Rational x : {rat(1, 2), rat(-1, 2), rat(3, 4), rat(1, 7), rat(-9, 10)})
            CHECK(arith_geom_sum(m, x) == higher_arith_geom(m, 1, x));
}

TEST_CASE("truncation polynomial has degree p") {
    for (long p = 0; p <= 6; ++p)
        for (long m = 0; m <= 4; ++m) CHECK(truncation_polynomial(p, m).size() <= static_cast<std::size_t>(p + 1));
}

TEST_CASE("geometric_tail examples") {
    CHECK(geometric_tail(rat(1, 2), 10, 1) == rat(1, 512));
    CHECK(geometric_tail(rat(1, 2), 0, 3) == 6);
    CHECK(geometric_tail(rat(9, 10), 100, 1) == pow(rat(9, 10), 100) * 10);
    CHECK_THROWS_AS(geometric_tail(1, 0, 1), PreconditionError);
    CHECK_THROWS_AS(geometric_tail(0, 0, 1), PreconditionError);
}

TEST_CASE("choose_K_disk examples") {
    CHECK(choose_K_disk(1, rat(1, 2)) == 2);
    CHECK(choose_K_disk(8, rat(1, 2)) == 5);
    CHECK(choose_K_disk(5, 0) == 1);
}

TEST_CASE("choose_K_disk postcondition and monotonicity") {
    std::vector<Rational> Cs{rat(1, 10), rat(1), rat(3, 2), rat(8), rat(100), rat(12345, 7)};
    std::vector<Rational> rs{rat(1, 10), rat(1, 2), rat(2, 3), rat(9, 10), rat(99, 100)};
    for (const auto& C : Cs)
        for (const auto& r : rs) {
            long K = choose_K_disk(C, r);
            // C a^{KN} 2^N < b^{KN} with r = a/b, in integers to skip the gcd work
            BigInt a = pow(Rational(numerator(r)), K).convert_to<BigInt>(), b = pow(Rational(denominator(r)), K).convert_to<BigInt>();
            BigInt aN = 1, bN = 1;
            for (long N = 1; N <= 64; ++N) {
                aN *= a;
                bN *= b;
                REQUIRE(numerator(C) * aN * (BigInt(1) << N) < denominator(C) * bN);
            }
            // minimality
            if (K > 1) CHECK_FALSE(pow(r, K - 1) < (C <= 1 ? rat(1, 2) : 1 / (2 * C)));
        }
    for (std::size_t i = 0; i + 1 < Cs.size(); ++i)
        for (const auto& r : rs) CHECK(choose_K_disk(Cs[i], r) <= choose_K_disk(Cs[i + 1], r));
    for (const auto& C : Cs)
        for (std::size_t j = 0; j + 1 < rs.size(); ++j) CHECK(choose_K_disk(C, rs[j]) <= choose_K_disk(C, rs[j + 1]));
}

TEST_CASE("truncation plan audit") {
    TruncationPlan plan;
    plan.target = 10;
    plan.budget_split = {{"tail", 11}, {"quadrature", 12}, {"rounding", 12}};
    plan.checks = {{"tail", rat(1, 4096), rat(1, 2048), true}};
    CHECK(plan.audit());
    plan.budget_split.push_back({"extra", 12});
    CHECK_FALSE(plan.audit());
    plan.budget_split.pop_back();
    plan.checks.push_back({"bad", rat(1), rat(1), true});
    CHECK_FALSE(plan.audit());
    plan.checks.back().strict = false;
    CHECK(plan.audit());
}
