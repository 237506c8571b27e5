#include "certheat/kernels.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace certheat;
using Float = boost::multiprecision::cpp_bin_float_50;

namespace {

double to_double(const Rational& q) { return q.convert_to<double>(); }
double to_double(const CertifiedValue& v) { return to_double(v.value()); }
double to_double(const Ball& b) { return b.mid.to_double(); }

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }

Float g0(const Float& t, const Float& x) { return x * exp(-x * x / t) / (t * sqrt(t)); }
Float gt0(const Float& t, const Float& x) { return exp(-x * x / t) / sqrt(t); }

// n-th central difference quotient with step h, Richardson extrapolated once
template <class F>
Float fd_derivative(F f, long n, const Float& t, const Float& h) {
    auto D = [&](const Float& step) {
        Float s = 0;
        Float binom = 1;
        for (long k = 0; k <= n; ++k) {
            Float arg = t + (Float(n) / 2 - k) * step;
            s += ((k % 2) ? -binom : binom) * f(arg);
            binom = binom * (n - k) / (k + 1);
        }
        return s / pow(step, n);
    };
    return (4 * D(h / 2) - D(h)) / 3;
}

// P_l^m by the three-term recurrence in l, Condon-Shortley phase included
double legendre_recurrence(long l, long m, double x) {
    double pmm = 1, s = std::sqrt(1 - x * x);
    for (long i = 1; i <= m; ++i) pmm *= -(2 * i - 1) * s;
    if (l == m) return pmm;
    double pm1 = x * (2 * m + 1) * pmm;
    if (l == m + 1) return pm1;
    double a = pmm, b = pm1;
    for (long ll = m + 2; ll <= l; ++ll) {
        double c = (x * (2 * ll - 1) * b - (ll + m - 1) * a) / (ll - m);
        a = b;
        b = c;
    }
    return b;
}

Rational random_rational(std::mt19937_64& rng, long lo_num, long hi_num, long den) {
    std::uniform_int_distribution<long> d(lo_num, hi_num);
    return rat(d(rng), den);
}

}  // namespace

TEST_CASE("Poisson kernel examples") {
    CHECK(poisson_kernel_2d(0, PiAffine(rat(1, 3)), PiAffine(0, rat(5, 4)), 40).value() == 1);
    auto v = poisson_kernel_2d(rat(1, 2), PiAffine(0, rat(1, 2)), PiAffine(0, rat(1, 2)), 40);
    CHECK(v.encloses(3));
    auto w = poisson_kernel_2d(rat(1, 2), PiAffine(0, 1), PiAffine(0), 40);
    CHECK(w.encloses(rat(1, 3)));
    CHECK(w.err_exponent() >= 40);
    CHECK_THROWS_AS(poisson_kernel_2d(1, PiAffine(0), PiAffine(0), 10), PreconditionError);
}

TEST_CASE("Poisson kernel has mean one") {
    for (Rational r : {rat(1, 4), rat(1, 2), rat(9, 10)}) {
        const long M = 512;  // trapezoid error is about 2 r^M
        double sum = 0;
        for (long j = 0; j < M; ++j) {
            Ball tau = mul(pi(60), rat(2 * j, M), 60);
            sum += to_double(poisson_kernel_ball(r, tau, 50));
        }
        CHECK(sum / M == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("heat_g examples") {
    CHECK(heat_g(0, 1, 1, 50).encloses(heat_g(0, 1, 1, 60).value()));
    CHECK(to_double(heat_g(0, 1, 1, 50)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(to_double(heat_g(1, 1, 1, 50)) == doctest::Approx(-0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(heat_g(0, 1, 0, 30).value() == 0);
    CHECK(heat_g_rational(1, 1, 1) == rat(-1, 2));
    CHECK_THROWS_AS(heat_g(0, 0, 1, 10), PreconditionError);
    CHECK_THROWS_AS(heat_g(2, rat(-1), 1, 10), PreconditionError);
}

TEST_CASE("heat_g matches Richardson finite differences") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Rational t = random_rational(rng, 500, 1500, 1000), x = random_rational(rng, 300, 2000, 1000);
        Float tf = Float(t.convert_to<Float>()), xf = Float(x.convert_to<Float>());
        for (long n = 0; n <= 6; ++n) {
            double got = to_double(heat_g(n, t, x, 60));
            double fd = fd_derivative([&](const Float& s) { return g0(s, xf); }, n, tf, Float(1e-3))
                            .convert_to<double>();
            REQUIRE(std::abs(got - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            // one step of the induction: the t-derivative of g^(n) is g^(n+1)
            double next = to_double(heat_g(n + 1, t, x, 60));
            auto gn = [&](const Float& s) {
                Rational sr(s.convert_to<double>());
                return Float(to_double(heat_g(n, sr, x, 60)));
            };
            double fd1 = fd_derivative(gn, 1, tf, Float(1e-4)).convert_to<double>();
            REQUIRE(std::abs(next - fd1) <= 1e-6 * std::max(1.0, std::abs(next)));
        }
    }
}

TEST_CASE("heat_g agrees with the confluent hypergeometric form at t = 1") {
    using boost::math::hypergeometric_1F1;
    for (long n = 0; n <= 12; ++n)
        for (double x : {0.1, 0.5, 1.0, 1.7}) {
            // g^(n)(1,x) = x e^{-x^2} (-1)^n Gamma(3/2+n)/Gamma(3/2) M(-n, 3/2, x^2)
            double ratio = std::tgamma(1.5 + n) / std::tgamma(1.5);
            double expected = x * std::exp(-x * x) * ((n % 2) ? -1 : 1) * ratio * hypergeometric_1F1(-double(n), 1.5, x * x);
            Rational xr(x);
            double got = to_double(heat_g(n, 1, xr, 60));
            CHECK(got == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
        }
}

TEST_CASE("heat_g_tilde examples and finite differences") {
    CHECK(to_double(heat_g_tilde(0, 1, 1, 50)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(heat_g_tilde(1, 1, 0, 10), PreconditionError);
    for (auto [n, x] : {std::pair<long, Rational>{1, rat(7, 10)}, {3, rat(1)}, {2, rat(1, 2)}, {5, rat(6, 5)}}) {
        Float xf = x.convert_to<Float>();
        double fd = fd_derivative([&](const Float& s) { return gt0(s, xf); }, n, Float(1), Float(1e-3))
                        .convert_to<double>();
        double got = to_double(heat_g_tilde(n, 1, x, 60));
        CHECK(std::abs(got - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("the unit-coefficient tilde variant differs from the derivative for n >= 2") {
    Rational x = rat(7, 10);
    Float xf = x.convert_to<Float>();
    for (long n = 1; n <= 4; ++n) {
        double fd = fd_derivative([&](const Float& s) { return gt0(s, xf); }, n, Float(1), Float(1e-3))
                        .convert_to<double>();
        double printed = to_double(heat_g_tilde_printed_ball(n, 1, x, 60));
        bool matches = std::abs(printed - fd) <= 1e-6 * std::max(1.0, std::abs(fd));
        CHECK(matches == (n == 1));
    }
}

TEST_CASE("Taylor recurrence reproduces the closed form") {
    Rational xi = rat(3, 4);
    auto q = heat_taylor_q(xi * xi, 30, 80);
    for (long k = 0; k < 30; ++k) {
        // q_k = R_k(1, xi) / k!
        Rational expected = heat_g_rational(k, 1, xi);
        for (long j = 2; j <= k; ++j) expected /= j;
        CHECK(q[static_cast<std::size_t>(k)].contains(expected));
        CHECK(q[static_cast<std::size_t>(k)].rad < Dyadic::pow2(-60));
    }
}

TEST_CASE("Cauchy coefficient bounds dominate") {
    for (Rational x : {rat(1, 10), rat(1, 2), rat(1), rat(3), rat(7)})
        for (long k = 0; k <= 60; k += 3) {
            Rational R = heat_g_rational(k, 1, x);
            Rational fact = 1;
            for (long j = 2; j <= k; ++j) fact *= j;
            double exact = std::exp(-to_double(x * x)) * to_double(absr(x * R) / fact);
            CHECK(exact <= to_double(heat_coeff_bound(k, x)));
            // the tilde family: coefficient is e^{-x^2} |q_k + q_{k-1}| with q as above
            Rational tk = R / fact;
            if (k >= 1) tk += heat_g_rational(k - 1, 1, x) / (fact / k);
            double tilde = std::exp(-to_double(x * x)) * std::abs(to_double(tk));
            CHECK(tilde <= 2.7183 * std::sqrt(double(k + 1)));
        }
}

TEST_CASE("deriv_growth_bound dominates sampled derivatives") {
    CHECK(growth_constant(1) >= 1);
    CHECK(deriv_growth_bound(7, 1) / deriv_growth_bound(0, 1) == 8);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> nd(0, 50), xd(1, 1000);
    for (Rational x0 : {rat(1, 2), rat(1), rat(2)}) {
        for (int s = 0; s < 3400; ++s) {
            long n = nd(rng);
            Rational x = x0 * xd(rng) / 1000;
            Rational fact = 1;
            for (long j = 2; j <= n; ++j) fact *= j;
            double v = std::exp(-to_double(x * x)) * to_double(absr(x * heat_g_rational(n, 1, x)) / fact);
            REQUIRE(v <= to_double(deriv_growth_bound(n, x0)));
        }
    }
}

TEST_CASE("sph_count") {
    CHECK(sph_count(3, 2) == 5);
    CHECK(sph_count(3, 0) == 1);
    CHECK(sph_count(4, 1) == 4);
    for (long l = 0; l <= 10; ++l) CHECK(sph_count(3, l) == 2 * l + 1);
    for (long l = 1; l <= 10; ++l) CHECK(sph_count(2, l) == 2);
    // d = 4: (l+1)^2
    for (long l = 0; l <= 10; ++l) CHECK(sph_count(4, l) == (l + 1) * (l + 1));
    CHECK_THROWS_AS(sph_count(1, 1), PreconditionError);
}

TEST_CASE("associated Legendre") {
    CHECK(assoc_legendre(0, 0, rat(1, 3), 30).value() == 1);
    CHECK(assoc_legendre(1, 0, rat(1, 2), 30).encloses(rat(1, 2)));
    // even m is a polynomial: P_2^2(x) = 3(1 - x^2)
    CHECK(assoc_legendre(2, 2, rat(1, 2), 50).encloses(rat(9, 4)));
    for (long l = 0; l <= 8; ++l)
        for (long m = 0; m <= l; ++m)
            for (double x : {-0.9, -0.3, 0.0, 0.5, 0.75}) {
                double got = to_double(assoc_legendre(l, m, Rational(x), 60));
                double expected = legendre_recurrence(l, m, x);
                REQUIRE(std::abs(got - expected) <= std::ldexp(1.0, -40) * std::max(1.0, std::abs(expected)));
            }
    CHECK_THROWS_AS(assoc_legendre(1, 2, 0, 10), PreconditionError);
}

TEST_CASE("spherical harmonics: constant, addition identity, Cauchy-Schwarz") {
    CHECK(to_double(real_sph_harmonic_3d(0, 0, PiAffine(rat(1, 3)), PiAffine(2), 50)) ==
          doctest::Approx(1 / std::sqrt(4 * std::numbers::pi)).epsilon(1e-14));
    std::mt19937_64 rng(3);
    for (int s = 0; s < 6; ++s) {
        PiAffine theta(0, random_rational(rng, 0, 1000, 1000));
        PiAffine phi(0, random_rational(rng, 0, 2000, 1000));
        for (long l = 0; l <= 5; ++l) {
            double sq = 0, abs_sum = 0;
            for (long m = -l; m <= l; ++m) {
                double y = to_double(real_sph_harmonic_3d(l, m, theta, phi, 60));
                sq += y * y;
                abs_sum += std::abs(y);
            }
            double expected = (2 * l + 1) / (4 * std::numbers::pi);
            CHECK(std::abs(sq - expected) <= 1e-10);
            // Gamma(3/2) / (2 pi^{3/2}) = 1/(4 pi)
            CHECK(abs_sum <= (2 * l + 1) / std::sqrt(4 * std::numbers::pi) + 1e-12);
        }
    }
}

TEST_CASE("spherical harmonics are orthonormal under product Gauss quadrature") {
    using boost::math::quadrature::gauss;
    const long Mphi = 16;
    auto y = [](long l, long m, double ct, double phi) {
        double st = std::sqrt(1 - ct * ct);
        long w = 60;
        return to_double(real_sph_harmonic_ball(l, m, Ball::from_rational(Rational(ct), w),
                                                Ball::from_rational(Rational(st), w),
                                                Ball::from_rational(Rational(phi), w), 50));
    };
    auto inner = [&](long l1, long m1, long l2, long m2) {
        return gauss<double, 10>::integrate(
            [&](double ct) {
                double s = 0;
                for (long j = 0; j < Mphi; ++j) {
                    double phi = 2 * std::numbers::pi * j / Mphi;
                    s += y(l1, m1, ct, phi) * y(l2, m2, ct, phi);
                }
                return s * 2 * std::numbers::pi / Mphi;
            },
            -1.0, 1.0);
    };
    CHECK(std::abs(inner(1, 0, 1, 1)) <= 1e-8);
    CHECK(std::abs(inner(1, 1, 1, 1) - 1) <= 1e-8);
    CHECK(std::abs(inner(2, -1, 2, -1) - 1) <= 1e-8);
    CHECK(std::abs(inner(3, 2, 1, 0)) <= 1e-8);
}
