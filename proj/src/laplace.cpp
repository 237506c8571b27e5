#include "certheat/laplace.hpp"

#include "certheat/kernels.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace certheat {

namespace {

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }
Rational two_pow(long e) { return ldexp(Rational(1), e); }

Rational disk_constant(const DiskProblem& p) { return 4 * p.g.sup_bound() / (1 - p.r0); }

bool band_limited_periodic(const EvaluableFunction& g) {
    const auto& reg = g.regularity();
    return reg.band_limit.has_value() && reg.extension == Extension::periodic;
}

void require_disk(const DiskProblem& p) {
    if (!(p.r0 >= 0 && p.r0 < 1)) throw PreconditionError("disk problem needs 0 <= r0 < 1");
    if (p.g.arity() != 1) throw PreconditionError("disk boundary data must be one-dimensional");
}

}  // namespace

FourierPair fourier_coeffs(const EvaluableFunction& g, long k, long prec, const QuadratureOptions& opts) {
    if (k < 0) throw PreconditionError("Fourier index must be nonnegative");
    WeightFamily weights = [k](const Ball& x, long p) {
        auto [c, s] = cos_sin(mul(x, Rational(k), p + 8), p);
        return std::vector<Ball>{c, s};
    };
    WeightBounds wb{1, Rational(k), Rational(k * k), k};
    long target = prec + 3;
    auto parts = integrate(g, weights, {wb, wb}, {target, target}, opts);
    long w = prec + 8;
    Ball p = pi(w);
    return {CertifiedValue::from_ball(div(parts[0], p, w), prec, 2),
            CertifiedValue::from_ball(div(parts[1], p, w), prec, 2)};
}

DiskSolver::DiskSolver(DiskProblem problem, QuadratureOptions opts) : problem_(std::move(problem)), opts_(opts) {
    require_disk(problem_);
}

TruncationPlan DiskSolver::plan(long n) const {
    const Rational& r0 = problem_.r0;
    TruncationPlan plan;
    plan.target = n;
    if (problem_.g.is_zero()) {
        plan.order = 0;
        plan.justification = "zero boundary data";
        plan.budget_split = {{"rounding", n + 1}};
        return plan;
    }
    Rational C = disk_constant(problem_);
    long K = choose_K_disk(C, r0);
    long N = n + 1;
    plan.order = K * N;
    Rational threshold = C <= 1 ? rat(1, 2) : 1 / (2 * C);
    plan.checks.push_back({"r0^K below " + std::string(C <= 1 ? "1/2" : "1/(2C)"), pow(r0, K), threshold, true});
    plan.checks.push_back({"C (r0^K)^(n+1) < 2^-(n+1)", C * pow(r0, K * N), two_pow(-N), true});
    plan.budget_split = {{"truncation", n + 1}, {"coefficients", n + 2}, {"rounding", n + 3}};
    std::ostringstream os;
    os << "C = 4||g||/(1-r0) = " << C << ", smallest K = " << K << ", " << K << "*(n+1) terms";
    plan.justification = os.str();
    return plan;
}

const DiskSolver::Coefficients& DiskSolver::coefficients(long n) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(n); it != cache_.end()) return *it->second;
    }
    auto co = std::make_shared<Coefficients>();
    co->plan = plan(n);
    const EvaluableFunction& g = problem_.g;
    const Rational& r0 = problem_.r0;
    long T = co->plan.order;
    long last = T;
    if (r0 == 0) {
        last = 0;
        co->exact_tail = true;
    } else if (band_limited_periodic(g) && *g.regularity().band_limit <= T) {
        last = *g.regularity().band_limit;
        co->exact_tail = true;
    }
    if (g.is_zero()) last = 0;
    co->cos_part.assign(static_cast<std::size_t>(last + 1), Ball(0));
    co->sin_part.assign(static_cast<std::size_t>(last + 1), Ball(0));
    if (!g.is_zero()) {
        Rational S = g.sup_bound();
        // a_0/2 carries 2^-(n+3); the pairs share 2^-(n+3) weighted by r0^-k
        std::vector<long> targets{n + 3};
        long kq = 0;
        long share = n + 4 + bits_above(Rational(std::max(last, 1L)));
        for (long k = 1; k <= last; ++k) {
            long t = share - floor_log2(pow(1 / r0, k));
            if (2 * S <= two_pow(-t)) break;  // |a_k|, |b_k| <= 2||g|| already fits, and t_k only shrinks
            targets.push_back(t);
            targets.push_back(t);
            kq = k;
        }
        for (long k = kq + 1; k <= last; ++k) {
            Dyadic trivial = ceil_to(2 * S, 40);
            co->cos_part[static_cast<std::size_t>(k)] = Ball(0, trivial);
            co->sin_part[static_cast<std::size_t>(k)] = Ball(0, trivial);
        }
        WeightFamily weights = [kq](const Ball& x, long p) {
            auto ladder = rotation_ladder(x, kq + 1, p + 8 + bits_above(Rational(kq + 1)));
            std::vector<Ball> out;
            out.push_back(Ball(1));
            for (long k = 1; k <= kq; ++k) {
                out.push_back(ladder[static_cast<std::size_t>(k)].first);
                out.push_back(ladder[static_cast<std::size_t>(k)].second);
            }
            return out;
        };
        std::vector<WeightBounds> bounds;
        bounds.push_back({1, 0, 0, 0});
        for (long k = 1; k <= kq; ++k) {
            WeightBounds wb{1, Rational(k), Rational(k * k), k};
            bounds.push_back(wb);
            bounds.push_back(wb);
        }
        auto parts = integrate(g, weights, bounds, targets, opts_, &co->quadrature);
        long tmax = *std::max_element(targets.begin(), targets.end()) + 4;
        Ball p = pi(tmax + 8);
        co->cos_part[0] = div(parts[0], p, tmax);
        for (long k = 1; k <= kq; ++k) {
            co->cos_part[static_cast<std::size_t>(k)] = div(parts[static_cast<std::size_t>(2 * k - 1)], p, tmax);
            co->sin_part[static_cast<std::size_t>(k)] = div(parts[static_cast<std::size_t>(2 * k)], p, tmax);
        }
    }
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.emplace(n, std::move(co));
    return *it->second;
}

Solution DiskSolver::solve(const Rational& r, const PiAffine& theta, long n) {
    if (r < 0) throw PreconditionError("radius must be nonnegative");
    if (r > problem_.r0) throw PreconditionError("radius exceeds r0");
    if (n < 0) throw PreconditionError("precision must be nonnegative");
    const Coefficients& co = coefficients(n);
    long last = static_cast<long>(co.cos_part.size()) - 1;
    long w = n + 10 + bits_above(Rational(last + 1)) + bits_above(problem_.g.sup_bound() + 1);
    Ball u = round(co.cos_part[0].ldexp(-1), w);
    if (r != 0) {
        Rational rk = 1;
        for (long k = 1; k <= last; ++k) {
            rk *= r;
            const Ball& a = co.cos_part[static_cast<std::size_t>(k)];
            const Ball& b = co.sin_part[static_cast<std::size_t>(k)];
            if (a.mid.is_zero() && a.rad.is_zero() && b.mid.is_zero() && b.rad.is_zero()) continue;
            PiAffine arg(Rational(theta.base * k), Rational(theta.pi_coeff * k));
            auto [c, s] = cos_sin(arg.value(w + 4), w);
            u += mul(round(a * c + b * s, w), rk, w);
        }
        if (!co.exact_tail) {
            Rational C = disk_constant(problem_);
            u = u.add_error(ceil_to(C * pow(problem_.r0, co.plan.order + 1), n + 40));
        }
    }
    return {CertifiedValue::from_ball(u, n, 2), co.plan};
}

Solution solve_disk(const DiskProblem& problem, const Rational& r, const PiAffine& theta, long n) {
    DiskSolver solver(problem);
    return solver.solve(r, theta, n);
}

EvaluableFunction periodic_extension(const EvaluableFunction& h) {
    if (h.arity() != 1 || !(h.domain()[0].lo == PiAffine(0)) || !(h.domain()[0].hi == PiAffine(1)))
        throw PreconditionError("extension needs data on [0,1]");
    Interval dom{0, PiAffine(0, 2)};
    if (h.is_zero()) return EvaluableFunction::zero({dom});
    Rational S = h.sup_bound();
    Rational slope = 2 * S / 5;  // |h(1) - h(0)| / (2pi - 1) with 2pi - 1 > 5
    const AxisRegularity& hr = h.regularity();
    AxisRegularity reg;
    reg.segments = hr.segments.empty() ? std::vector<Segment>{Segment{0, 1}} : hr.segments;
    reg.segments.push_back(Segment{1, PiAffine(0, 2), 0, Rational(0), Rational(0)});
    reg.extension = Extension::periodic;
    EvaluableFunction::Modulus modulus;
    if (hr.lipschitz) {
        reg.lipschitz = std::max(*hr.lipschitz, slope);
        modulus = lipschitz_modulus(*reg.lipschitz);
    } else {
        long sb = bits_above(slope);
        modulus = [h, sb](long k) { return std::max(h.modulus(k + 1), k + 1 + sb); };
    }
    auto eval = [h](std::span<const Dyadic> pt, long p) -> Dyadic {
        const Dyadic& tau = pt[0];
        if (tau <= Dyadic(1)) return h(tau, p);
        return settle_with(
            [&](long w) {
                Ball h0 = h.ball(Dyadic(0), w + 4), h1 = h.ball(Dyadic(1), w + 4);
                Ball den = Ball(1) - pi(w + 8).ldexp(1);
                Ball frac = div(Ball(tau - Dyadic(1)), den, w + 4);
                return round(h1 + (h1 - h0) * frac, w);
            },
            p);
    };
    return EvaluableFunction({dom}, eval, modulus, S, {reg});
}

EvaluableFunction hardness_boundary_disk(const Rational& r0, const PiAffine& theta0, const EvaluableFunction& h) {
    if (!(r0 >= 0 && r0 < 1)) throw PreconditionError("hardness boundary needs 0 <= r0 < 1");
    EvaluableFunction ext = periodic_extension(h);
    if (r0 == 0 || ext.is_zero()) return ext;
    // rho(tau) = (1 - 2 r0 cos(theta0 - tau) + r0^2) / (1 - r0^2) cancels the Poisson kernel at (r0, theta0)
    Rational rho_max = (1 + r0) / (1 - r0);
    Rational rho_d = 2 * r0 / (1 - r0 * r0);
    Rational S = ext.sup_bound();
    const AxisRegularity& er = ext.regularity();
    AxisRegularity reg;
    reg.extension = Extension::periodic;
    std::optional<Rational> L = er.lipschitz;
    for (Segment s : er.segments) {
        Rational len = (s.hi - s.lo).upper();
        if (L && s.second_derivative) *s.second_derivative = *s.second_derivative * rho_max + 2 * *L * rho_d + S * rho_d;
        else s.second_derivative.reset();
        if (L && s.slope_variation) *s.slope_variation = *s.slope_variation * rho_max + 2 * *L * len * rho_d + S * len * rho_d;
        else s.slope_variation.reset();
        reg.segments.push_back(s);
    }
    EvaluableFunction::Modulus modulus;
    if (L) {
        reg.lipschitz = *L * rho_max + S * rho_d;
        modulus = lipschitz_modulus(*reg.lipschitz);
    } else {
        long g1 = 1 + bits_above(rho_max), g2 = 1 + bits_above(S * rho_d);
        modulus = [ext, g1, g2](long k) { return std::max(ext.modulus(k + g1), k + g2); };
    }
    long guard = bits_above(rho_max) + bits_above(S + 1) + 4;
    auto eval = [ext, r0, theta0, guard](std::span<const Dyadic> pt, long p) {
        Dyadic tau = pt[0];
        return settle_with(
            [&](long w) {
                long wp = w + guard;
                Ball diff = theta0.value(wp + 4) - Ball(tau);
                Ball num = Ball::from_rational(1 + r0 * r0, wp) - mul(cos(diff, wp), 2 * r0, wp);
                Ball rho = div(num, Ball::from_rational(1 - r0 * r0, wp), wp);
                return round(ext.ball(tau, wp) * rho, w + 2);
            },
            p);
    };
    return EvaluableFunction(ext.domain(), eval, modulus, S * rho_max, {reg});
}

TruncationPlan plan_ball_truncation(long d, const Rational& sup_bound, const Rational& r0, long n) {
    if (d < 3) throw PreconditionError("ball problems need d >= 3");
    if (!(r0 >= 0 && r0 < 1)) throw PreconditionError("ball problem needs 0 <= r0 < 1");
    TruncationPlan plan;
    plan.target = n;
    plan.budget_split = {{"truncation", n + 1}, {"coefficients", n + 2}, {"rounding", n + 3}};
    Rational fact = 1;
    for (long j = 2; j <= d - 2; ++j) fact *= j;
    long Nn = std::max(n, 1L);
    long K = 1;
    auto tail = [&](long k) { return sup_bound / fact * higher_arith_geom(k * Nn + 1, d - 2, r0); };
    while (!(tail(K) < two_pow(-(n + 1)))) ++K;
    plan.order = K * Nn;
    plan.checks.push_back({"||g||/(d-2)! sum_{l>Kn} r0^l (l+d-2)!/l! < 2^-(n+1)", tail(K), two_pow(-(n + 1)), true});
    std::ostringstream os;
    os << "smallest K = " << K << " for the harmonic tail in dimension " << d;
    plan.justification = os.str();
    return plan;
}

Solution solve_ball(const BallProblem& problem, const Rational& r, const PiAffine& theta, const PiAffine& phi, long n) {
    if (problem.d != 3) throw PreconditionError("explicit ball solve is available for d = 3 only");
    if (!(problem.r0 >= 0 && problem.r0 < 1)) throw PreconditionError("ball problem needs 0 <= r0 < 1");
    if (r < 0 || r > problem.r0) throw PreconditionError("radius must lie in [0, r0]");
    const EvaluableFunction& g = problem.g;
    if (g.arity() != 2) throw PreconditionError("sphere data must have two angles");
    if (!g.harmonic_degree) throw PreconditionError("sphere data needs a declared harmonic degree");
    TruncationPlan plan = plan_ball_truncation(3, g.sup_bound(), problem.r0, n);
    if (g.is_zero()) return {CertifiedValue::from_ball(Ball(0), n, 2), plan};
    const long degree = *g.harmonic_degree;
    const long D = r == 0 ? 0 : std::min(degree, plan.order);
    const bool exact_tail = D == degree || r == 0;
    // both rules integrate every product of two harmonics of degree <= degree exactly
    const long M = 2 * degree + 2;

    const auto& r0reg = g.regularity(0);
    const auto& r1reg = g.regularity(1);
    for (long extra = 8; extra <= 256; extra *= 2) {
        long w = n + extra + 2 * bits_above(Rational(M * M)) + bits_above(g.sup_bound() + 1) +
                 bits_above(Rational((D + 1) * (D + 1)));
        long node_bits;
        Dyadic shift;
        if (r0reg.lipschitz && r1reg.lipschitz) {
            Rational L = *r0reg.lipschitz + *r1reg.lipschitz;
            node_bits = w + 4 + bits_above(L);
            shift = ceil_to(L * two_pow(-node_bits), w + 30);
        } else {
            node_bits = g.modulus(w + 4);
            shift = Dyadic::pow2(-(w + 4));
        }
        long wn = node_bits + 8;
        Ball pw = pi(wn);
        std::vector<Ball> ct(static_cast<std::size_t>(M)), st(ct.size()), fw(ct.size()), phis(ct.size());
        std::vector<Dyadic> theta_nodes(ct.size()), phi_nodes(ct.size());
        for (long j = 0; j < M; ++j) {
            // Fejer's first rule in cos(theta), nodes (2j+1)pi/(2M)
            Ball th = mul(pw, Rational(2 * j + 1, 2 * M), wn);
            auto [c, s] = cos_sin(th, w + 4);
            ct[j] = c;
            st[j] = s;
            Ball sum(0);
            for (long k = 1; k <= M / 2; ++k)
                sum += div(cos(mul(th, Rational(2 * k), wn), w + 4), Rational(4 * k * k - 1), w + 4);
            fw[j] = mul(Ball(1) - sum.ldexp(1), Rational(2, M), w + 4);
            theta_nodes[j] = th.mid.round_nearest(node_bits + 1);
            phis[j] = mul(pw, Rational(2 * j, M), wn);
            phi_nodes[j] = phis[j].mid.round_nearest(node_bits + 1);
        }
        std::vector<Ball> gv(static_cast<std::size_t>(M * M));
        for (long j = 0; j < M; ++j)
            for (long i = 0; i < M; ++i) {
                std::array<Dyadic, 2> pt{theta_nodes[j], phi_nodes[i]};
                gv[j * M + i] = Ball(g(pt, w + 4), Dyadic::pow2(-(w + 4)) + shift);
            }
        Ball phi_weight = mul(pw, Rational(2, M), w + 4);
        auto [cth, sth] = cos_sin(theta.value(w + 8), w + 4);
        Ball phi_eval = phi.value(w + 8);
        Ball u(0);
        Rational rl = 1;
        for (long l = 0; l <= D; ++l) {
            if (l > 0) rl *= r;
            for (long m = -l; m <= l; ++m) {
                Ball c(0);
                for (long j = 0; j < M; ++j) {
                    Ball row(0);
                    for (long i = 0; i < M; ++i)
                        row += gv[j * M + i] * real_sph_harmonic_ball(l, m, ct[j], st[j], phis[i], w + 4);
                    c += round(row * fw[j], w + 4);
                }
                c = round(c * phi_weight, w + 4);
                u += mul(c * real_sph_harmonic_ball(l, m, cth, sth, phi_eval, w + 4), rl, w + 4);
            }
        }
        if (!exact_tail) u = u.add_error(ceil_to(plan.checks[0].lhs, n + 40));
        if (u.rad <= Dyadic::pow2(-(n + 1))) return {CertifiedValue::from_ball(u, n, 2), plan};
    }
    throw std::runtime_error("ball solution did not settle");
}

}  // namespace certheat
