// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "certheat/hardness.hpp"
#include "certheat/heat.hpp"
#include "certheat/kernels.hpp"
#include "certheat/vocab.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>

using namespace certheat;

namespace {

using Float = boost::multiprecision::cpp_bin_float_50;
using Wide = boost::multiprecision::cpp_bin_float_100;
using Clock = std::chrono::steady_clock;

Float to_float(const Rational& q) { return Float(numerator(q)) / Float(denominator(q)); }
Wide to_wide(const Rational& q) { return Wide(numerator(q)) / Wide(denominator(q)); }
double to_double(const Rational& q) { return q.convert_to<double>(); }
const Float kPi = boost::math::constants::pi<Float>();

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Rational random_rational(std::mt19937_64& rng, long lo, long hi, long den) {
    return Rational(std::uniform_int_distribution<long>(lo, hi)(rng), den);
}

// plans emitted by criteria 1-3, audited by criterion 9
std::vector<TruncationPlan> emitted_plans;

struct Outcome {
    bool ok;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    Outcome o{false, {}};
    auto start = Clock::now();
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.ok) ++failures;
    std::cout << fmt::format("[{}] criterion {}: {} ({}; {:.1f} s)", o.ok ? "PASS" : "FAIL", id, title, o.detail,
                             seconds_since(start))
              << std::endl;
}

Outcome disk_modes() {
    std::mt19937_64 rng(101);
    auto start = Clock::now();
    long cases = 0, bad = 0;
    Float worst = 0;
    const Rational r0(9, 10);
    for (long k = 0; k <= 8; ++k) {
        std::vector<Rational> cosv(static_cast<std::size_t>(k + 1), 0);
        cosv.back() = 1;
        DiskSolver solver(DiskProblem{trig_polynomial(cosv, {}), r0});
        for (int i = 0; i < 20; ++i) {
            Rational r = random_rational(rng, 0, 900, 1000), theta = random_rational(rng, 0, 6283, 1000);
            Float truth = pow(to_float(r), k) * cos(k * to_float(theta));
            for (long n : {10L, 20L, 30L}) {
                auto s = solver.solve(r, PiAffine(theta), n);
                emitted_plans.push_back(s.plan);
                Float scaled = abs(to_float(s.value.value()) - truth) * pow(Float(2), n);
                worst = std::max(worst, scaled);
                bad += scaled > 1;
                ++cases;
            }
        }
    }
    double secs = seconds_since(start);
    return {bad == 0 && secs < 60, fmt::format("{} cases, {} outside 2^-n, worst |err| 2^n = {:.3f}, budget 60 s",
                                               cases, bad, worst.convert_to<double>())};
}

Outcome interval_modes() {
    std::mt19937_64 rng(202);
    auto start = Clock::now();
    long cases = 0, bad = 0;
    Float worst = 0;
    const Rational t0(1, 4);
    for (Rational L : {Rational(1), Rational(3, 2)})
        for (Rational alpha : {Rational(1, 2), Rational(1)})
            for (long k = 1; k <= 4; ++k) {
                std::vector<Rational> coeffs(static_cast<std::size_t>(k), 0);
                coeffs.back() = 1;
                IntervalSolver solver(IntervalProblem{L, alpha, sine_series(L, coeffs), t0});
                for (Rational t : {t0, Rational(2 * t0)})
                    for (int i = 0; i < 3; ++i) {
                        Rational x = random_rational(rng, 0, 1000, 1000) * L;
                        Float truth = sin(k * kPi * to_float(x / L)) *
                                      exp(-Float(k * k) * kPi * kPi * to_float(alpha * t / (L * L)));
                        for (long n : {10L, 16L, 24L}) {
                            auto s = solver.solve(t, x, n);
                            emitted_plans.push_back(s.plan);
                            Float scaled = abs(to_float(s.value.value()) - truth) * pow(Float(2), n);
                            worst = std::max(worst, scaled);
                            bad += scaled > 1;
                            ++cases;
                        }
                    }
            }
    double secs = seconds_since(start);
    return {bad == 0 && secs < 60, fmt::format("{} cases, {} outside 2^-n, worst |err| 2^n = {:.3f}, budget 60 s",
                                               cases, bad, worst.convert_to<double>())};
}

// u(t,x) = int_0^t h(s) x / sqrt(4 pi (t-s)^3) exp(-x^2 / (4 (t-s))) ds, alpha = 1
double boundary_oracle(const std::function<double(double)>& h, double t, double x) {
    auto f = [&](double s) {
        double sigma = t - s;
        if (sigma <= 0) return 0.0;
        return h(s) * x / std::sqrt(4 * std::numbers::pi * sigma * sigma * sigma) * std::exp(-x * x / (4 * sigma));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0, t, 15, 1e-13);
}

Outcome halfline_boundary() {
    auto start = Clock::now();
    struct Data {
        std::string name;
        EvaluableFunction h;
        std::function<double(double)> eval;
    };
    std::vector<Data> data{{"s", polynomial({0, 1}, 0, 2), [](double s) { return s; }},
                           {"s^2", polynomial({0, 0, 1}, 0, 2), [](double s) { return s * s; }},
                           {"sin(pi s/2)", sine_series(2, {1}), [](double s) { return std::sin(std::numbers::pi * s / 2); }}};
    long cases = 0, bad = 0;
    double worst = 0;
    std::string worst_case;
    for (const auto& d : data) {
        HalflineBoundaryProblem p{1, d.h, Rational(1, 2), Rational(3, 2)};
        for (Rational t : {Rational(1, 4), Rational(1, 2), Rational(1)})
            for (Rational x : {Rational(1, 2), Rational(1), Rational(3, 2)}) {
                double truth = boundary_oracle(d.eval, to_double(t), to_double(x));
                for (long n : {10L, 16L}) {
                    auto s = solve_halfline_boundary(p, t, x, n);
                    emitted_plans.push_back(s.plan);
                    double gap = std::abs(to_double(s.value.value()) - truth);
                    double scaled = gap / (std::ldexp(1.0, static_cast<int>(-n)) + 1e-10);
                    if (scaled > worst) {
                        worst = scaled;
                        worst_case = fmt::format("h = {}, t = {}, x = {}, n = {}", d.name, t.str(), x.str(), n);
                    }
                    bad += scaled > 1;
                    ++cases;
                }
            }
    }
    double secs = seconds_since(start);
    return {bad == 0 && secs < 300,
            fmt::format("{} cases, {} outside 2^-n + 1e-10, worst ratio {:.3f} at {}, budget 300 s", cases, bad, worst,
                        worst_case)};
}

// order-`order` central difference of f at t with step h
Wide central_difference(const std::function<Wide(const Rational&)>& f, long order, const Rational& t, const Rational& h) {
    Wide sum = 0;
    BigInt binom = 1;
    for (long j = 0; j <= order; ++j) {
        Rational offset = h * Rational(order - 2 * j, 2);
        Wide term = Wide(binom) * f(t + offset);
        sum += (j % 2) ? Wide(-term) : term;
        binom = binom * (order - j) / (j + 1);
    }
    return sum / pow(to_wide(h), order);
}

// two Richardson levels on top of the O(h^2) central difference
Wide richardson(const std::function<Wide(const Rational&)>& f, long order, const Rational& t, const Rational& h) {
    auto d = [&](const Rational& s) { return central_difference(f, order, t, s); };
    Wide d0 = d(h), d1 = d(h / 2), d2 = d(h / 4);
    Wide e0 = (4 * d1 - d0) / 3, e1 = (4 * d2 - d1) / 3;
    return (16 * e1 - e0) / 15;
}

Outcome kernel_derivatives() {
    std::mt19937_64 rng(404);
    const Rational h(1, 64);
    double worst_g = 0, worst_tilde = 0, worst_printed = 0;
    long printed_fail = 0;
    for (int i = 0; i < 20; ++i) {
        Rational t = random_rational(rng, 500, 1500, 1000), x = random_rational(rng, 300, 2000, 1000);
        auto g0 = [&](const Rational& s) { return to_wide(heat_g(0, s, x, 300).value()); };
        auto tilde0 = [&](const Rational& s) { return to_wide(heat_g_tilde(0, s, x, 300).value()); };
        for (long n = 1; n <= 6; ++n) {
            Wide fd = richardson(g0, n, t, h);
            Wide got = to_wide(heat_g(n, t, x, 120).value());
            worst_g = std::max(worst_g, (abs(got - fd) / std::max(Wide(1e-30), abs(fd))).convert_to<double>());
            Wide fdt = richardson(tilde0, n, t, h);
            Wide leib = to_wide(heat_g_tilde(n, t, x, 120).value());
            Wide printed = to_wide(settle(heat_g_tilde_printed_ball(n, t, x, 140), 120).to_rational());
            double rel_leib = (abs(leib - fdt) / abs(fdt)).convert_to<double>();
            double rel_printed = (abs(printed - fdt) / abs(fdt)).convert_to<double>();
            worst_tilde = std::max(worst_tilde, rel_leib);
            worst_printed = std::max(worst_printed, rel_printed);
            printed_fail += rel_printed > 1e-6;
        }
    }
    std::cout << fmt::format("    printed tilde recurrence (t g^(n) + g^(n-1))/x: {} of 120 derivatives off by more "
                             "than 1e-6 (worst relative {:.3e}); Leibniz form worst {:.3e}",
                             printed_fail, worst_printed, worst_tilde)
              << std::endl;
    return {worst_g <= 1e-6 && worst_tilde <= 1e-6,
            fmt::format("g: worst relative {:.3e}; tilde (Leibniz): worst relative {:.3e}", worst_g, worst_tilde)};
}

// exact partial sum of sum_{k>=m} x^k (k+p)!/k! up to the point where a ratio bound puts the tail under 1e-15
struct PartialOracle {
    std::vector<Rational> prefix;  // prefix[k] = sum_{j<k} terms
    Rational tail;
};

PartialOracle partial_oracle(long p, const Rational& x, long max_m) {
    auto weight = [&](long k) {
        BigInt w = 1;
        for (long j = 1; j <= p; ++j) w *= k + j;
        return w;
    };
    const Rational ax = x < 0 ? Rational(-x) : x, eps(1, BigInt(10) * BigInt("100000000000000"));
    PartialOracle o;
    o.prefix.push_back(0);
    Rational power = 1;
    for (long k = 0;; ++k) {
        Rational term = power * weight(k);
        // for j >= k the term ratio is at most |x| (k+p+1)/(k+1)
        Rational ratio = ax * Rational(k + p + 1, k + 1);
        Rational abs_term = term < 0 ? Rational(-term) : term;
        if (k > max_m && ratio < 1 && abs_term / (1 - ratio) < eps) {
            o.tail = abs_term / (1 - ratio);
            return o;
        }
        o.prefix.push_back(o.prefix.back() + term);
        power *= x;
    }
}

Outcome series_identities() {
    auto start = Clock::now();
    long cases = 0, bad = 0;
    for (Rational x : {Rational(9, 10), Rational(-9, 10), Rational(1, 2), Rational(-1, 2), Rational(1, 10)})
        for (long p = 0; p <= 3; ++p) {
            auto o = partial_oracle(p, x, 20);
            for (long m = 0; m <= 20; ++m) {
                Rational partial = o.prefix.back() - o.prefix[static_cast<std::size_t>(m)];
                Rational closed = higher_arith_geom(m, p, x);
                bad += abs(closed - partial) > o.tail;
                if (p == 1) bad += abs(arith_geom_sum(m, x) - partial) > o.tail;
                cases += p == 1 ? 2 : 1;
            }
        }
    double secs = seconds_since(start);
    return {bad == 0 && secs < 10, fmt::format("{} identities, {} outside the exact tail bound, budget 10 s", cases, bad)};
}

Outcome addition_identity() {
    std::mt19937_64 rng(606);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        PiAffine theta(random_rational(rng, 0, 3141, 1000)), phi(random_rational(rng, 0, 6283, 1000));
        for (long l = 0; l <= 5; ++l) {
            Rational sum = 0;
            for (long m = -l; m <= l; ++m) {
                Rational y = real_sph_harmonic_3d(l, m, theta, phi, 80).value();
                sum += y * y;
            }
            Float gap = abs(to_float(sum) - Float(2 * l + 1) / (4 * kPi));
            worst = std::max(worst, gap.convert_to<double>());
        }
    }
    return {worst <= 1e-10, fmt::format("300 sums, worst |sum - (2l+1)/(4 pi)| = {:.3e}", worst)};
}

Outcome counting_recovery() {
    std::mt19937_64 rng(707);
    auto start = Clock::now();
    long bad = 0, total = 0;
    std::string first_bad;
    for (int i = 0; i < 30; ++i) {
        long nv = 4 + i % 9;
        auto inst = random_instance(nv, rng);
        long truth = brute_force_count(inst);
        for (auto pipeline : {Pipeline::neumann, Pipeline::disk, Pipeline::interval}) {
            ++total;
            long got = run_pipeline(inst, pipeline).count;
            if (got != truth) {
                ++bad;
                if (first_bad.empty())
                    first_bad = fmt::format(", first mismatch {} n_vars = {}: {} vs {}", to_string(pipeline), nv, got, truth);
            }
        }
    }
    double secs = seconds_since(start);
    return {bad == 0 && secs < 300,
            fmt::format("30 instances, n_vars 4..12, {} of {} pipeline runs wrong{}, budget 300 s", bad, total, first_bad)};
}

Outcome blowup_trend() {
    std::mt19937_64 rng(808);
    std::vector<CountingInstance> family;
    for (long nv = 4; nv <= 14; ++nv) family.push_back(random_instance(nv, rng));
    auto records = measure_blowup(family, Pipeline::neumann, 5);
    long run = 1, best = 1;
    std::string times;
    bool all_ok = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        all_ok = all_ok && records[i].ok;
        times += fmt::format("{}{:.2f}", i ? " " : "", records[i].wall_ms);
        if (i > 0) {
            run = records[i].wall_ms >= records[i - 1].wall_ms ? run + 1 : 1;
            best = std::max(best, run);
        }
    }
    return {all_ok && best >= 8,
            fmt::format("median ms for n_vars 4..14: {}; longest nondecreasing run {} sizes", times, best)};
}

Outcome plan_audits() {
    long failed = 0;
    for (const auto& p : emitted_plans) failed += !p.audit();
    return {failed == 0 && !emitted_plans.empty(), fmt::format("{} plans, {} failed", emitted_plans.size(), failed)};
}

}  // namespace

int main() {
    report(1, "disk solver on harmonic modes", disk_modes);
    report(2, "interval heat eigenmodes", interval_modes);
    report(3, "half-line boundary solver vs quadrature", halfline_boundary);
    report(4, "kernel derivatives vs Richardson differences", kernel_derivatives);
    report(5, "series identities vs partial sums", series_identities);
    report(6, "spherical harmonic addition identity", addition_identity);
    report(7, "counting recovery on all pipelines", counting_recovery);
    report(8, "blowup trend on the neumann pipeline", blowup_trend);
    report(9, "budget audits of every emitted plan", plan_audits);
    std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << std::endl;
    return failures == 0 ? 0 : 1;
}
