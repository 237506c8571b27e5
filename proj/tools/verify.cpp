#include "cli.hpp"

#include "certheat/hardness.hpp"
#include "certheat/heat.hpp"
#include "certheat/kernels.hpp"
#include "certheat/vocab.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace certheat::cli {

namespace {

constexpr double kPi = std::numbers::pi;

double to_double(const Rational& q) { return q.convert_to<double>(); }
double to_double(const CertifiedValue& v) { return to_double(v.value()); }

Rational random_rational(std::mt19937_64& rng, long lo, long hi, long den) {
    return Rational(std::uniform_int_distribution<long>(lo, hi)(rng), den);
}

class Checks {
public:
    void add(std::string name, bool ok, std::string detail = {}) {
        lines_.push_back({std::move(name), ok, std::move(detail)});
    }
    // a thrown exception counts as a failed check instead of aborting the suite
    void run(const std::string& name, const std::function<std::string(bool&)>& body) {
        bool ok = true;
        try {
            std::string detail = body(ok);
            add(name, ok, detail);
        } catch (const std::exception& e) {
            add(name, false, std::string("threw: ") + e.what());
        }
    }
    std::vector<CheckLine> take() { return std::move(lines_); }

private:
    std::vector<CheckLine> lines_;
};

double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

// Richardson-extrapolated central difference in t of f at t
double richardson(const std::function<double(const Rational&)>& f, const Rational& t, const Rational& h) {
    auto central = [&](const Rational& s) { return (f(t + s) - f(t - s)) / to_double(2 * s); };
    return (4 * central(h / 2) - central(h)) / 3;
}

void kernel_checks(Checks& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    c.run("kernels: time derivatives of g against finite differences", [&](bool& ok) {
        double worst = 0;
        for (int trial = 0; trial < 6; ++trial) {
            Rational t = random_rational(rng, 600, 1500, 1000), x = random_rational(rng, 300, 1500, 1000);
            for (long n = 1; n <= 5; ++n) {
                double exact = to_double(heat_g(n, t, x, 60));
                double fd = richardson([&](const Rational& s) { return to_double(heat_g(n - 1, s, x, 60)); }, t,
                                       Rational(1, 256));
                worst = std::max(worst, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
            }
        }
        ok = worst < 1e-6;
        return fmt::format("worst relative gap {:.2e}", worst);
    });
    c.run("kernels: derivatives of t^(-1/2) exp(-x^2/t) against finite differences", [&](bool& ok) {
        double worst = 0;
        for (int trial = 0; trial < 6; ++trial) {
            Rational t = random_rational(rng, 600, 1500, 1000), x = random_rational(rng, 300, 1500, 1000);
            for (long n = 1; n <= 5; ++n) {
                double exact = to_double(heat_g_tilde(n, t, x, 60));
                double fd = richardson([&](const Rational& s) { return to_double(heat_g_tilde(n - 1, s, x, 60)); },
                                       t, Rational(1, 256));
                worst = std::max(worst, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
            }
        }
        ok = worst < 1e-6;
        return fmt::format("worst relative gap {:.2e}", worst);
    });
    c.run("kernels: Taylor recurrence matches the derivatives at t = 1", [&](bool& ok) {
        double worst = 0;
        for (int trial = 0; trial < 4; ++trial) {
            Rational xi = random_rational(rng, 200, 2000, 1000);
            auto q = heat_taylor_q(xi * xi, 12, 80);
            double xd = to_double(xi), scale = xd * std::exp(-xd * xd), fact = 1;
            for (long k = 0; k < 12; ++k) {
                if (k > 0) fact *= static_cast<double>(k);
                double direct = to_double(heat_g(k, 1, xi, 60)) / (fact * scale);
                double rec = to_double(q[static_cast<std::size_t>(k)].mid.to_rational());
                worst = std::max(worst, std::abs(direct - rec) / std::max(1.0, std::abs(direct)));
            }
        }
        ok = worst < 1e-9;
        return fmt::format("worst relative gap {:.2e}", worst);
    });
    c.run("kernels: Taylor coefficient bounds hold", [&](bool& ok) {
        long checked = 0;
        for (int trial = 0; trial < 4; ++trial) {
            Rational x = random_rational(rng, 100, 3000, 1000);
            Rational fact = 1;
            for (long k = 0; k <= 20; ++k, ++checked) {
                if (k > 0) fact *= k;
                Rational coeff = abs(heat_g(k, 1, x, 60).value()) / fact;
                ok = ok && coeff <= heat_coeff_bound(k, x);
            }
        }
        return fmt::format("{} coefficients", checked);
    });
    c.run("kernels: Poisson kernel averages to one", [&](bool& ok) {
        double worst = 0;
        for (int trial = 0; trial < 3; ++trial) {
            Rational r = random_rational(rng, 0, 700, 1000);
            PiAffine theta(0, random_rational(rng, 0, 2000, 1000));
            const int m = 128;
            double sum = 0;
            for (int j = 0; j < m; ++j) sum += to_double(poisson_kernel_2d(r, theta, PiAffine(0, Rational(2 * j, m)), 50));
            worst = std::max(worst, std::abs(sum / m - 1));
        }
        ok = worst < 1e-10;
        return fmt::format("worst gap {:.2e}", worst);
    });
    c.run("kernels: spherical harmonic addition identity", [&](bool& ok) {
        double worst = 0;
        for (int trial = 0; trial < 3; ++trial) {
            PiAffine theta(0, random_rational(rng, 0, 1000, 1000)), phi(0, random_rational(rng, 0, 2000, 1000));
            for (long l = 0; l <= 4; ++l) {
                double sq = 0;
                for (long m = -l; m <= l; ++m) {
                    double y = to_double(real_sph_harmonic_3d(l, m, theta, phi, 60));
                    sq += y * y;
                }
                worst = std::max(worst, std::abs(sq - (2 * l + 1) / (4 * kPi)));
            }
        }
        ok = worst < 1e-10;
        return fmt::format("worst gap {:.2e}", worst);
    });
    c.run("kernels: harmonic dimension counts", [&](bool& ok) {
        auto binom = [](long n, long k) -> BigInt {
            if (k < 0 || n < k) return 0;
            BigInt b = 1;
            for (long i = 1; i <= k; ++i) b = b * (n - k + i) / i;
            return b;
        };
        for (long d = 2; d <= 6; ++d)
            for (long l = 0; l <= 8; ++l)
                ok = ok && sph_count(d, l) == binom(l + d - 1, d - 1) - binom(l + d - 3, d - 1);
        return std::string("d = 2..6, l = 0..8");
    });
}

void series_checks(Checks& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 1);
    auto draw_x = [&] { return random_rational(rng, -700, 700, 1000); };
    c.run("series: arithmetic-geometric sum against partial sums", [&](bool& ok) {
        double worst = 0;
        for (int trial = 0; trial < 8; ++trial) {
            Rational x = draw_x();
            long m = std::uniform_int_distribution<long>(0, 10)(rng);
            double xd = to_double(x), partial = 0;
            for (long k = m; k < m + 400; ++k) partial += static_cast<double>(k + 1) * std::pow(xd, static_cast<double>(k));
            worst = std::max(worst, std::abs(to_double(arith_geom_sum(m, x)) - partial));
            ok = ok && arith_geom_sum(m, x) == higher_arith_geom(m, 1, x);
        }
        ok = ok && worst < 1e-10;
        return fmt::format("worst gap {:.2e}", worst);
    });
    c.run("series: higher sums against partial sums", [&](bool& ok) {
        double worst = 0;
        for (int trial = 0; trial < 8; ++trial) {
            Rational x = draw_x();
            long m = std::uniform_int_distribution<long>(0, 8)(rng), p = std::uniform_int_distribution<long>(0, 5)(rng);
            double xd = to_double(x), partial = 0;
            for (long k = m; k < m + 600; ++k) {
                double w = 1;
                for (long j = 1; j <= p; ++j) w *= static_cast<double>(k + j);
                partial += w * std::pow(xd, static_cast<double>(k));
            }
            double exact = to_double(higher_arith_geom(m, p, x));
            worst = std::max(worst, std::abs(exact - partial) / std::max(1.0, std::abs(exact)));
            ok = ok && higher_arith_geom_upper(m, p, abs(x)) >= higher_arith_geom(m, p, abs(x));
        }
        ok = ok && worst < 1e-9;
        return fmt::format("worst relative gap {:.2e}", worst);
    });
    c.run("series: power upper bounds", [&](bool& ok) {
        for (int trial = 0; trial < 8; ++trial) {
            Rational q = random_rational(rng, 1, 999, 1000);
            for (long k : {1L, 7L, 64L, 65L, 200L}) {
                Rational exact = pow(q, k), up = pow_upper(q, k);
                ok = ok && up >= exact && (up - exact) <= exact * Rational(k, BigInt(1) << 50);
            }
        }
        return std::string("k in {1, 7, 64, 65, 200}");
    });
    c.run("series: disk truncation order is minimal", [&](bool& ok) {
        for (int trial = 0; trial < 8; ++trial) {
            Rational r0 = random_rational(rng, 1, 950, 1000), C = random_rational(rng, 1, 5000, 1000);
            long K = choose_K_disk(C, r0);
            Rational bound = C <= 1 ? Rational(1, 2) : 1 / (2 * C);
            ok = ok && pow(r0, K) < bound && (K == 1 || pow(r0, K - 1) >= bound);
        }
        return std::string();
    });
}

void laplace_checks(Checks& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 2);
    c.run("laplace: disk reproduces r^k cos(k theta)", [&](bool& ok) {
        const long n = 20;
        double worst = 0;
        for (long k = 0; k <= 3; ++k) {
            std::vector<Rational> cosv(static_cast<std::size_t>(k + 1), 0);
            cosv.back() = 1;
            DiskSolver solver(DiskProblem{trig_polynomial(cosv, {}), Rational(9, 10)});
            for (int trial = 0; trial < 2; ++trial) {
                Rational r = random_rational(rng, 0, 900, 1000), b = random_rational(rng, 0, 2000, 1000);
                auto s = solver.solve(r, PiAffine(0, b), n);
                double truth = std::pow(to_double(r), static_cast<double>(k)) * std::cos(k * kPi * to_double(b));
                worst = std::max(worst, std::abs(to_double(s.value) - truth));
                ok = ok && s.plan.audit();
            }
        }
        ok = ok && worst <= std::ldexp(1.0, -n) + 1e-12;
        return fmt::format("worst gap {:.2e}, tolerance 2^-{}", worst, n);
    });
    c.run("laplace: ball reproduces r^l Y_lm", [&](bool& ok) {
        const long n = 16;
        double worst = 0;
        for (auto [l, m] : {std::pair{1L, 0L}, {2L, 1L}, {3L, -2L}}) {
            BallProblem prob{3, sphere_harmonic_sum({{l, m, 1}}), Rational(3, 4)};
            Rational r = random_rational(rng, 0, 750, 1000);
            PiAffine theta(0, random_rational(rng, 0, 1000, 1000)), phi(0, random_rational(rng, 0, 2000, 1000));
            auto s = solve_ball(prob, r, theta, phi, n);
            double truth = std::pow(to_double(r), static_cast<double>(l)) *
                           to_double(real_sph_harmonic_3d(l, m, theta, phi, 60));
            worst = std::max(worst, std::abs(to_double(s.value) - truth));
            ok = ok && s.plan.audit();
        }
        ok = ok && worst <= std::ldexp(1.0, -n) + 1e-12;
        return fmt::format("worst gap {:.2e}, tolerance 2^-{}", worst, n);
    });
}

void heat_checks(Checks& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 3);
    c.run("heat: interval eigenmodes decay at rate k^2 pi^2 alpha", [&](bool& ok) {
        const long n = 20;
        double worst = 0;
        for (long k = 1; k <= 3; ++k) {
            std::vector<Rational> coeffs(static_cast<std::size_t>(k), 0);
            coeffs.back() = 1;
            Rational alpha = random_rational(rng, 250, 1000, 1000);
            IntervalSolver solver(IntervalProblem{1, alpha, sine_series(1, coeffs), Rational(1, 4)});
            Rational t = random_rational(rng, 250, 1000, 1000), x = random_rational(rng, 0, 1000, 1000);
            auto s = solver.solve(t, x, n);
            double truth = std::sin(k * kPi * to_double(x)) * std::exp(-k * k * kPi * kPi * to_double(alpha * t));
            worst = std::max(worst, std::abs(to_double(s.value) - truth));
            ok = ok && s.plan.audit();
        }
        ok = ok && worst <= std::ldexp(1.0, -n) + 1e-12;
        return fmt::format("worst gap {:.2e}, tolerance 2^-{}", worst, n);
    });
    c.run("heat: Neumann solution is the time integral of the source", [&](bool& ok) {
        Rational a = random_rational(rng, -2000, 2000, 1000), b = random_rational(rng, -2000, 2000, 1000);
        Rational t = random_rational(rng, 1, 1000, 1000);
        auto v = solve_neumann_constant_force(polynomial({a, b}, 0, 1), t, 24);
        ok = v.encloses(a * t + b * t * t / 2);
        return fmt::format("t = {}", t.str());
    });
    c.run("heat: half-line boundary solver against quadrature", [&](bool& ok) {
        const long n = 10;
        HalflineBoundaryProblem p{1, polynomial({0, 0, 1}, 0, 2), Rational(1, 2), Rational(3, 2)};
        Rational t = random_rational(rng, 250, 1000, 1000), x = random_rational(rng, 500, 1500, 1000);
        auto s = solve_halfline_boundary(p, t, x, n);
        double td = to_double(t), xd = to_double(x);
        double truth = integrate(
            [&](double sv) {
                double sigma = td - sv;
                if (sigma <= 0) return 0.0;
                return sv * sv * xd / std::sqrt(4 * kPi * sigma * sigma * sigma) * std::exp(-xd * xd / (4 * sigma));
            },
            0, td);
        double gap = std::abs(to_double(s.value) - truth);
        ok = gap <= std::ldexp(1.0, -n) + 1e-12 && s.plan.audit();
        return fmt::format("t = {}, x = {}, gap {:.2e}", t.str(), x.str(), gap);
    });
}

void hardness_checks(Checks& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 4);
    c.run("hardness: integrand mass is count times 4^-n_vars", [&](bool& ok) {
        for (long nv = 1; nv <= 6; ++nv) {
            auto inst = random_instance(nv, rng);
            ok = ok && integrate(counting_integrand(inst), 2 * nv + 20).mid.to_rational() == counting_integral(inst);
        }
        return std::string("n_vars = 1..6");
    });
    c.run("hardness: one verifier call per evaluation", [&](bool& ok) {
        auto calls = std::make_shared<std::atomic<long>>(0);
        auto f = counting_integrand(random_instance(5, rng), calls);
        for (long i = 0; i < 64; ++i) (void)f(Dyadic(2 * i + 1, -7), 30);
        ok = calls->load() == 64;
        return fmt::format("{} calls for 64 evaluations", calls->load());
    });
    for (auto pipeline : {Pipeline::neumann, Pipeline::disk, Pipeline::interval})
        c.run("hardness: " + to_string(pipeline) + " pipeline recovers brute-force counts", [&](bool& ok) {
            for (long nv = 2; nv <= 6; ++nv) {
                auto inst = random_instance(nv, rng);
                ok = ok && run_pipeline(inst, pipeline).count == brute_force_count(inst);
            }
            return std::string("n_vars = 2..6");
        });
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"kernels", "series", "laplace", "heat", "hardness", "all"};
    return names;
}

std::vector<CheckLine> run_suite(const std::string& suite, std::uint64_t seed) {
    Checks c;
    bool all = suite == "all";
    bool known = false;
    auto want = [&](const char* name) {
        bool hit = all || suite == name;
        known = known || hit;
        return hit;
    };
    if (want("kernels")) kernel_checks(c, seed);
    if (want("series")) series_checks(c, seed);
    if (want("laplace")) laplace_checks(c, seed);
    if (want("heat")) heat_checks(c, seed);
    if (want("hardness")) hardness_checks(c, seed);
    if (!known) throw ConfigError("unknown suite '" + suite + "' (kernels, series, laplace, heat, hardness, all)");
    return c.take();
}

}  // namespace certheat::cli
