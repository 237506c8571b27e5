#include "certheat/certified.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <random>

using namespace certheat;
using Float = boost::multiprecision::cpp_bin_float_100;

namespace {

Rational to_rat(const Float& f) {
    // 100 decimal digits is far beyond any precision checked here
    Float scaled = boost::multiprecision::ldexp(f, 300);
    BigInt m = static_cast<BigInt>(boost::multiprecision::round(scaled));
    return ldexp(Rational(m), -300);
}

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace

TEST_CASE("dyadic literal parse and print round-trip") {
    for (const char* s : {"+.1", "-.1", "+101.0110", "-1.0", "+.00000", "+1.1"}) {
        auto d = DyadicDecimal::parse(s);
        CHECK(d.str() == s);
    }
    CHECK(DyadicDecimal::parse("+101.011").to_rational() == rat(43, 8));
    CHECK(DyadicDecimal::parse("+101.011").pcs() == 3);
    CHECK(DyadicDecimal::parse("+101.011").tnd() == 6);
    CHECK_THROWS_AS(DyadicDecimal::parse("101.1"), PreconditionError);
    CHECK_THROWS_AS(DyadicDecimal::parse("+01.1"), PreconditionError);
    CHECK_THROWS_AS(DyadicDecimal::parse("+1."), PreconditionError);
    CHECK_THROWS_AS(DyadicDecimal::parse("+12.1"), PreconditionError);
}

TEST_CASE("approximates") {
    CHECK(approximates(DyadicDecimal::parse("+.1"), rat(6, 10)));
    CHECK(approximates(DyadicDecimal::parse("+.1"), rat(1, 2)));
    CHECK_FALSE(approximates(DyadicDecimal::parse("+.10"), rat(8, 10)));
}

TEST_CASE("round_to examples") {
    CHECK(round_to(rat(1, 3), 2).str() == "+.01");
    CHECK(round_to(rat(0), 5).str() == "+.00000");
    CHECK(round_to(rat(1, 2), 3).str() == "+.100");
    // ties go to the even neighbour
    CHECK(round_to(rat(1, 8), 2).str() == "+.00");
    CHECK(round_to(rat(3, 8), 2).str() == "+.10");
    CHECK(round_to(rat(-3, 8), 2).str() == "-.10");
}

TEST_CASE("round_to is within 2^-n for small denominators") {
    for (long den = 1; den <= 40; ++den)
        for (long num = -3 * den; num <= 3 * den; ++num)
            for (long n = 0; n <= 8; ++n) {
                Rational x = rat(num, den);
                auto d = round_to(x, n);
                REQUIRE(absr(d.to_rational() - x) <= ldexp(Rational(1), -n));
                REQUIRE(d.pcs() == std::max(n, 1L));
            }
}

TEST_CASE("unit grid covers 0..2^n") {
    CHECK(unit_grid_point(BigInt(8), 3).to_rational() == 1);
    CHECK(unit_grid_point(BigInt(3), 3).to_rational() == rat(3, 8));
    CHECK_THROWS_AS(unit_grid_point(BigInt(9), 3), PreconditionError);
}

TEST_CASE("certified value arithmetic") {
    auto half = CertifiedValue(DyadicDecimal::parse("+.1000000000"), 10);
    auto quarter = CertifiedValue(DyadicDecimal::parse("+.0100000000"), 10);
    auto s = half + quarter;
    CHECK(s.value() == rat(3, 4));
    CHECK(s.err_exponent() == 9);

    auto third = CertifiedValue(round_to(rat(1, 3), 20), 20);
    auto p = third * third;
    CHECK(p.encloses(rat(1, 9)));
    CHECK(p.err_exponent() >= 18);

    auto zero = CertifiedValue(round_to(0, 12), 12);
    auto one = CertifiedValue(round_to(1, 12), 12);
    auto z = zero * one;
    CHECK(z.value() == 0);
    CHECK(z.err_exponent() >= 11);
    CHECK((-half).value() == rat(-1, 2));
    CHECK_THROWS(CertifiedValue(DyadicDecimal::parse("+.1"), 4));
}

TEST_CASE("certified contracts dominate exact error on random expressions") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> num(-500, 500), den(1, 97), bits(8, 40);
    for (int trial = 0; trial < 300; ++trial) {
        Rational xs[3];
        CertifiedValue cs[3];
        for (int i = 0; i < 3; ++i) {
            xs[i] = rat(num(rng), den(rng));
            long n = bits(rng);
            cs[i] = CertifiedValue(round_to(xs[i], n), n);
        }
        Rational exact = xs[0] * xs[1] + xs[2] - xs[0];
        CertifiedValue got = cs[0] * cs[1] + cs[2] - cs[0];
        REQUIRE(got.encloses(exact));
        CertifiedValue r = got.rounded(6);
        REQUIRE(r.encloses(exact));
    }
}

TEST_CASE("ball elementary functions enclose high-precision references") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> num(-4000, 4000);
    for (int trial = 0; trial < 60; ++trial) {
        Dyadic x(BigInt(num(rng)), -8);
        Float xf = Float(x.to_double());
        for (long p : {20L, 64L, 130L}) {
            Ball c = cos(Ball(x), p), s = sin(Ball(x), p);
            REQUIRE(c.rad <= Dyadic::pow2(-p));
            REQUIRE(c.contains(to_rat(boost::multiprecision::cos(xf))));
            REQUIRE(s.contains(to_rat(boost::multiprecision::sin(xf))));
            if (x.to_double() < 60) {
                Dyadic y = x.ldexp(-3);
                Ball e = exp(Ball(y), p);
                REQUIRE(e.contains(to_rat(boost::multiprecision::exp(Float(y.to_double())))));
            }
        }
    }
    Ball pi_ball = pi(200);
    CHECK(pi_ball.contains(to_rat(boost::math::constants::pi<Float>())));
    CHECK(pi_ball.rad <= Dyadic::pow2(-200));
    Ball r = sqrt(Ball(Dyadic(2)), 90);
    CHECK(r.contains(to_rat(boost::multiprecision::sqrt(Float(2)))));
    Ball q = div(Ball(Dyadic(1)), Ball(Dyadic(3)), 50);
    CHECK(q.contains(rat(1, 3)));
    Ball w = powi(Ball(Dyadic(BigInt(9), -4)), 40, 60);
    CHECK(w.contains(pow(rat(9, 16), 40)));
}

TEST_CASE("settle returns a dyadic within the requested precision") {
    Ball b = exp(Ball(Dyadic(1)), 40);
    Dyadic d = settle(b, 38);
    CHECK(absr(d.to_rational() - to_rat(boost::multiprecision::exp(Float(1)))) <= ldexp(Rational(1), -38));
    CHECK_THROWS(settle(Ball(Dyadic(0), Dyadic(1)), 5));
}

TEST_CASE("rounding negative rationals across a limb boundary") {
    // 2^-98 * m / 6 lands just below -0.6779; the result must stay negative
    Rational q = Rational(BigInt("-1289129172058255266949751635970")) / ldexp(Rational(6), 98);
    Dyadic r = round_nearest(q, 98);
    CHECK(r.sign() < 0);
    CHECK(absr(r.to_rational() - q) <= ldexp(Rational(1), -99));
    CHECK(floor_to(q, 98).to_rational() <= q);
    CHECK(ceil_to(q, 98).to_rational() >= q);
}
