#include "certheat/heat.hpp"

#include "certheat/kernels.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <optional>

namespace certheat {

namespace {

using boost::multiprecision::int256_t;

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }
Rational two_pow(long e) { return ldexp(Rational(1), e); }

BigInt floor_int(const Rational& q) {
    BigInt n = boost::multiprecision::numerator(q), d = boost::multiprecision::denominator(q);
    BigInt f = n / d;
    if (f * d > n) f -= 1;
    return f;
}

BigInt ceil_int(const Rational& q) {
    BigInt f = floor_int(q);
    return Rational(f) == q ? f : BigInt(f + 1);
}

BigInt isqrt_up(const BigInt& v) {
    BigInt s = boost::multiprecision::sqrt(v);
    if (s * s < v) s += 1;
    return s;
}

Rational sqrt_upper(const Rational& q, long bits = 40) {
    BigInt scale = BigInt(1) << bits;
    return Rational(isqrt_up(ceil_int(q * scale * scale))) / Rational(scale);
}

Rational sqrt_lower(const Rational& q, long bits = 40) {
    BigInt scale = BigInt(1) << bits;
    return Rational(BigInt(boost::multiprecision::sqrt(floor_int(q * scale * scale)))) / Rational(scale);
}

// e^y and e^-y for y >= 0, as rational upper bounds
Rational exp_upper(const Rational& y) { return upper_rational(exp(Ball::from_rational(y, 64), 64)); }
Rational exp_neg_upper(const Rational& y) { return 1 / lower_rational(exp(Ball::from_rational(y, 64), 64)); }

Rational inv_sqrt_pi_upper() { return sqrt_upper(1 / pi_lower()); }

// sup of u^(a2/2) exp(-c u) over [ulo, uhi]; the maximum of the unimodal map sits at u = a/c
Rational power_exp_sup(long a2, const Rational& c, const Rational& ulo, const Rational& uhi) {
    Rational u = uhi;
    if (c > 0) u = std::clamp(Rational(a2, 2) / c, ulo, uhi);
    Rational v = pow(u, a2 / 2);
    if (a2 % 2) v *= sqrt_upper(u);
    return v * exp_neg_upper(c * u);
}

Dyadic dyadic_upper(const Rational& q) { return ceil_to(q, 40 - (q > 0 ? floor_log2(q) : 0)); }

BigInt to_fixed(const Dyadic& d, long F) {
    long s = d.exponent() + F;
    return s >= 0 ? BigInt(d.mantissa() << s) : BigInt(d.mantissa() >> -s);
}

template <class I>
I horner_fixed(const std::vector<I>& a, const I& w, long F) {
    I acc = a.back();
    for (std::size_t i = a.size() - 1; i-- > 0;) {
        acc *= w;
        acc >>= F;
        acc += a[i];
    }
    return acc;
}

// Taylor polynomial of a kernel K(sigma) around sigma = 1 in w = sigma - 1, with certified bounds
// on K and on the dropped tail for |w| <= 1 - 1/N.
struct TimeSeries {
    std::vector<Ball> coeffs;
    // |K|, |K'|, |K''| for sigma in [lo, hi]
    std::function<std::array<Rational, 3>(const Rational&, const Rational&)> exact;
    std::array<Rational, 3> tail;
};

// Fixed-point Horner on the coefficient midpoints. Each step truncates by at most one unit and
// |w| <= 1 - 1/(2N) after rounding, so the accumulated error is below 2N units.
class FixedHorner {
public:
    FixedHorner(const std::vector<Ball>& coeffs, long N) : N_(N) {
        for (const auto& c : coeffs) mids_.push_back(c.mid);
        Dyadic m(0);
        for (const auto& c : coeffs) m = std::max(m, c.mid.abs());
        mag_bits_ = (m.is_zero() ? 0 : m.msb() + 2) + bits_above(Rational(static_cast<long long>(coeffs.size()))) + 2;
    }

    Ball operator()(const Ball& w, long p, const Rational& slope) {
        long F = p + bits_above(Rational(N_)) + 4;
        Table& tab = table(F);
        BigInt W = to_fixed(w.mid.round_nearest(F), F);
        BigInt acc;
        if (tab.narrow.empty()) acc = horner_fixed(tab.wide, W, F);
        else acc = static_cast<BigInt>(horner_fixed(tab.narrow, static_cast<int256_t>(W), F));
        Rational units = Rational(4 * N_ + 2);
        Dyadic rad = dyadic_upper(units * two_pow(-F) + slope * (w.rad.to_rational() + two_pow(-F - 1)));
        return {Dyadic(acc, -F), rad};
    }

private:
    struct Table {
        std::vector<BigInt> wide;
        std::vector<int256_t> narrow;
    };

    Table& table(long F) {
        auto it = tables_.find(F);
        if (it != tables_.end()) return it->second;
        Table t;
        for (const auto& m : mids_) t.wide.push_back(to_fixed(m.round_nearest(F), F));
        if (2 * F + mag_bits_ + 4 < 250)
            for (const auto& v : t.wide) t.narrow.emplace_back(v);
        return tables_.emplace(F, std::move(t)).first->second;
    }

    long N_;
    long mag_bits_ = 0;
    std::vector<Dyadic> mids_;
    std::map<long, Table> tables_;
};

// int_0^{t-1/N} P(t - 1 - s) h(s) ds with P the Taylor polynomial; the sigma = t - s range is cut
// into dyadic pieces [1/N, 2/N], [2/N, 4/N], ... so the kernel bounds stay local.
Ball integrate_time(const EvaluableFunction& h, const Rational& t, long N, const TimeSeries& ts, long target,
                    const QuadratureOptions& opts, long& evaluations) {
    std::vector<std::pair<Rational, Rational>> pieces;
    for (Rational lo(1, N); lo < t;) {
        Rational hi = std::min(Rational(2 * lo), t);
        pieces.emplace_back(lo, hi);
        lo = hi;
    }
    if (pieces.empty()) return Ball(0);
    long share = target + 1 + bits_above(Rational(static_cast<long long>(pieces.size())));
    auto horner = std::make_shared<FixedHorner>(ts.coeffs, N);
    Rational S = h.sup_bound();
    Ball total(0);
    Rational coeff_error = 0;
    for (const auto& [lo, hi] : pieces) {
        auto bounds = ts.exact(lo, hi);
        WeightBounds wb;
        wb.sup = bounds[0] + ts.tail[0];
        wb.d1 = bounds[1] + ts.tail[1];
        wb.d2 = bounds[2] + ts.tail[2];
        Rational slope = wb.d1;
        Rational shift = t - 1;
        WeightFamily weights = [horner, slope, shift](const Ball& s, long p) {
            Ball w = Ball::from_rational(shift, p + 16) - s;
            return std::vector<Ball>{(*horner)(w, p, slope)};
        };
        QuadraturePlan qp;
        Ball part = integrate(restrict_to(h, t - hi, t - lo), weights, {wb}, {share}, opts, &qp)[0];
        evaluations += qp.evaluations();
        total += part;
        // the Horner weight uses coefficient midpoints; their radii enter here with |w| <= 1 - lo
        Dyadic r = dyadic_upper(1 - lo), power(1), sum(0);
        for (const auto& c : ts.coeffs) {
            sum += c.rad * power;
            power = (power * r).round_up_bits(40);
        }
        coeff_error += sum.to_rational() * S * (hi - lo);
    }
    return total.add_error(dyadic_upper(coeff_error));
}

// erf(z): alternating Taylor series, or 1 - erfc with erfc(a) <= e^{-a^2}/(a sqrt(pi)) far out
Ball erf_ball(const Ball& z, long p) {
    Rational zm = z.mid.to_rational(), za = absr(zm);
    // |erf'| <= 2/sqrt(pi) < 5/4
    Dyadic spread = z.rad * Dyadic(5, -2);
    if (za >= 1) {
        Rational far = exp_neg_upper(za * za) * inv_sqrt_pi_upper() / za;
        if (far <= two_pow(-(p + 1))) return Ball(zm > 0 ? 1 : -1, dyadic_upper(far) + spread);
    }
    long wp = p + 12 + static_cast<long>(ceil_int(za * za * Rational(3, 2)));
    Ball x(z.mid), x2 = x * x, term = x, sum = x;
    Rational ratio_cap = 2 * za * za + 1;
    for (long k = 1;; ++k) {
        term = -div(round(term * x2, wp), Rational(k), wp);
        sum = round(sum + div(term, Rational(2 * k + 1), wp), wp);
        // past k > 2 z^2 the terms shrink by half each step, so the rest is below |term|
        if (Rational(k) >= ratio_cap && (term.mid.is_zero() || term.mid.msb() < -wp)) {
            sum = sum.add_error(term.mid.abs() + term.rad);
            break;
        }
    }
    Ball scale = div(Ball(2), sqrt(pi(wp + 4), wp + 2), wp);
    return round(scale * sum, p + 4).add_error(spread);
}

// Piecewise-linear interpolant through knots; |f - l| <= error and |l| <= sup f on f's domain.
struct Interpolant {
    std::vector<Rational> knots;
    std::vector<Dyadic> values;
    Rational error = 0;
};

// error of interpolating one segment with 2^j equal pieces, or nullopt if nothing applies
std::optional<Rational> piece_error(const EvaluableFunction& f, const Segment& seg, long j, long goal_bits) {
    const auto& reg = f.regularity();
    Rational h = (seg.hi.base - seg.lo.base) / Rational(BigInt(1) << j);
    std::optional<Rational> best;
    auto offer = [&](const Rational& e) {
        if (!best || e < *best) best = e;
    };
    if (seg.second_derivative && seg.smooth_cells_log2 >= 0 && j >= seg.smooth_cells_log2)
        offer(*seg.second_derivative * h * h / 8);
    if (seg.slope_variation) offer(*seg.slope_variation * h / 2);
    if (reg.lipschitz) offer(*reg.lipschitz * h / 2);
    if (h <= two_pow(-f.modulus(goal_bits))) offer(two_pow(-goal_bits));
    return best;
}

Interpolant interpolate(const EvaluableFunction& f, const Rational& eps) {
    const auto& dom = f.domain()[0];
    if (!dom.lo.is_rational() || !dom.hi.is_rational()) throw PreconditionError("data needs a rational domain");
    Interpolant out;
    Rational S = f.sup_bound();
    if (f.is_zero() || S == 0) {
        out.knots = {dom.lo.base, dom.hi.base};
        out.values = {Dyadic(), Dyadic()};
        return out;
    }
    auto segs = f.regularity().segments;
    if (segs.empty()) segs.push_back(Segment{dom.lo, dom.hi, -1, {}, {}});
    Rational goal = eps / 2;
    long goal_bits = ceil_log2(1 / goal);
    out.knots.push_back(segs.front().lo.base);
    for (const auto& seg : segs) {
        if (!seg.lo.is_rational() || !seg.hi.is_rational()) throw PreconditionError("segments need rational ends");
        long j = 0;
        std::optional<Rational> err;
        for (; j <= 24; ++j) {
            err = piece_error(f, seg, j, goal_bits);
            if (err && *err <= goal) break;
        }
        if (j > 24) throw PreconditionError("data too rough for the requested precision");
        out.error = std::max(out.error, *err);
        long pieces = 1L << j;
        Rational h = (seg.hi.base - seg.lo.base) / pieces;
        for (long i = 1; i <= pieces; ++i) out.knots.push_back(seg.lo.base + h * i);
    }
    // each knot value is within 2^-(vb-1) of f: evaluation error plus the shift from rounding the knot
    long vb = ceil_log2(1 / eps) + 3;
    const auto& reg = f.regularity();
    long node_bits = reg.lipschitz ? vb + bits_above(*reg.lipschitz) : f.modulus(vb);
    Dyadic cap = floor_to(S, vb + 2);
    for (const auto& y : out.knots) {
        Dyadic yd = round_nearest(y, node_bits);
        if (yd.to_rational() < dom.lo.base) yd = ceil_to(y, node_bits);
        if (yd.to_rational() > dom.hi.base) yd = floor_to(y, node_bits);
        Dyadic v = f(yd, vb);
        // clipping toward [-S, S] never moves the value away from f
        if (v > cap) v = cap;
        if (v < -cap) v = -cap;
        out.values.push_back(v);
    }
    out.error += two_pow(-(vb - 1)) + two_pow(-(vb + 2));
    return out;
}

// Per knot and image: zeta = (y -+ x)/sqrt(4 alpha), erf(zeta), C_k = zeta e^{-zeta^2} q_k (k < T) and
// H_k = gt_k + gt_{k-1} with gt_k = e^{-zeta^2}(q_k + q_{k-1}) the Taylor coefficients at sigma = 1.
struct ImageKnot {
    Ball erf;
    std::vector<Ball> C, H;
};

ImageKnot image_knot(const Rational& offset, const Rational& alpha, const Ball& inv_c, long T, long w) {
    Rational zeta_sq = offset * offset / (4 * alpha);
    Ball zeta = round(Ball::from_rational(offset, w + 8) * inv_c, w + 4);
    auto q = heat_taylor_q(zeta_sq, T + 1, w + 4);
    Ball e = exp(Ball::from_rational(-zeta_sq, w + 8), w + 4);
    Ball ze = round(zeta * e, w + 4);
    ImageKnot k;
    k.erf = erf_ball(zeta, w);
    Ball prev_gt(0);
    for (long m = 0; m <= T; ++m) {
        const Ball& qm = q[static_cast<std::size_t>(m)];
        if (m < T) k.C.push_back(round(ze * qm, w));
        Ball gt = round(e * (m > 0 ? qm + q[static_cast<std::size_t>(m - 1)] : qm), w);
        k.H.push_back(round(gt + prev_gt, w));
        prev_gt = gt;
    }
    return k;
}

// I_m = int l(y) [gt_m((y-x)^2/(4a)) - gt_m((y+x)^2/(4a))] dy, m = 0..T, exactly for the interpolant l.
// With zeta = (y -+ x)/c, c = sqrt(4a), and l = beta + s c zeta on a piece:
//   int gt_0 dzeta = (sqrt(pi)/2) erf,  int gt_m dzeta = -C_{m-1}/(2m),  int zeta gt_m dzeta = -H_m/2.
std::vector<Ball> image_moments_at(const Interpolant& l, const Rational& alpha, const Rational& x, long T, long w) {
    Ball c = sqrt(Ball::from_rational(4 * alpha, w + 8), w + 8);
    Ball inv_c = div(Ball(1), c, w + 8);
    std::vector<Ball> A(static_cast<std::size_t>(T + 1)), B(static_cast<std::size_t>(T + 1));
    Ball erf_sum(0);
    auto knot = [&](std::size_t i) {
        return std::pair{image_knot(l.knots[i] - x, alpha, inv_c, T, w), image_knot(l.knots[i] + x, alpha, inv_c, T, w)};
    };
    auto prev = knot(0);
    for (std::size_t i = 1; i < l.knots.size(); ++i) {
        auto cur = knot(i);
        const Rational& ya = l.knots[i - 1];
        Rational fa = l.values[i - 1].to_rational();
        Rational s = (l.values[i].to_rational() - fa) / (l.knots[i] - ya);
        Ball am = round(mul(c, fa + s * (x - ya), w + 4), w + 4);
        Ball ap = round(mul(c, fa - s * (x + ya), w + 4), w + 4);
        erf_sum = round(erf_sum + am * (cur.first.erf - prev.first.erf) - ap * (cur.second.erf - prev.second.erf), w);
        for (long m = 0; m <= T; ++m) {
            auto um = static_cast<std::size_t>(m);
            if (m > 0) {
                auto k = um - 1;
                A[um] = round(A[um] + am * (cur.first.C[k] - prev.first.C[k]) -
                                  ap * (cur.second.C[k] - prev.second.C[k]), w);
            }
            if (s != 0) {
                Ball dh = (cur.first.H[um] - prev.first.H[um]) - (cur.second.H[um] - prev.second.H[um]);
                B[um] = round(B[um] + mul(dh, s, w), w);
            }
        }
        prev = std::move(cur);
    }
    Ball half_root_pi = div(sqrt(pi(w + 8), w + 4), Rational(2), w + 4);
    std::vector<Ball> out(static_cast<std::size_t>(T + 1));
    for (long m = 0; m <= T; ++m) {
        auto um = static_cast<std::size_t>(m);
        Ball j0 = m == 0 ? half_root_pi * erf_sum : -div(A[um], Rational(2 * m), w);
        out[um] = round(j0 - mul(B[um], 2 * alpha, w), w);
    }
    return out;
}

// moments with every radius below 2^-goal, raising the working precision until they are
std::vector<Ball> image_moments(const Interpolant& l, const Rational& alpha, const Rational& x, long T, long goal) {
    Rational slope = 0, level = 0;
    for (std::size_t i = 1; i < l.knots.size(); ++i) {
        Rational s = absr((l.values[i] - l.values[i - 1]).to_rational() / (l.knots[i] - l.knots[i - 1]));
        slope = std::max(slope, s);
        level = std::max(level, absr(l.values[i].to_rational()));
    }
    long w = goal + 12 + bits_above(Rational(static_cast<long long>(l.knots.size()))) +
             bits_above((level + slope * (absr(x) + absr(l.knots.back()))) * (1 + 4 * alpha) + slope * 4 * alpha);
    for (int attempt = 0;; ++attempt) {
        auto out = image_moments_at(l, alpha, x, T, w);
        Dyadic worst;
        for (const auto& b : out) worst = std::max(worst, b.rad);
        if (worst.is_zero() || worst.msb() < -goal) return out;
        if (attempt == 3) throw std::runtime_error("image moments did not reach the requested accuracy");
        w += 32 + std::max(0L, worst.msb() + goal);
    }
}

// bounds on sigma^(-1/2) exp(-zeta^2/sigma) and two sigma-derivatives, zeta^2 in [zlo, zhi]
std::array<Rational, 3> gtilde_bounds(const Rational& zlo, const Rational& zhi, const Rational& slo,
                                      const Rational& shi) {
    Rational ulo = 1 / shi, uhi = 1 / slo;
    auto M = [&](long a2) { return power_exp_sup(a2, zlo, ulo, uhi); };
    return {M(1), zhi * M(5) + rat(1, 2) * M(3), zhi * zhi * M(9) + 3 * zhi * M(7) + rat(3, 4) * M(5)};
}

// bounds on z sigma^(-3/2) exp(-z^2/sigma) and two sigma-derivatives
std::array<Rational, 3> boundary_kernel_bounds(const Rational& zsq, const Rational& z_hi, const Rational& slo,
                                               const Rational& shi) {
    Rational ulo = 1 / shi, uhi = 1 / slo;
    auto M = [&](long a2) { return power_exp_sup(a2, zsq, ulo, uhi); };
    return {z_hi * M(3), z_hi * (zsq * M(7) + rat(3, 2) * M(5)),
            z_hi * (zsq * zsq * M(11) + 5 * zsq * M(9) + rat(15, 4) * M(7))};
}

// smallest T in [lo, cap] with bound(T) <= budget for a nonincreasing bound, or -1
long smallest_order(const std::function<Rational(long)>& bound, const Rational& budget, long lo, long cap) {
    // search upward from lo: bounds at huge orders carry huge exact denominators
    long step = 1, hi = lo;
    while (bound(hi) > budget) {
        if (hi == cap) return -1;
        lo = hi + 1;
        hi = std::min(cap, hi + step);
        step *= 2;
    }
    while (lo < hi) {
        long mid = lo + (hi - lo) / 2;
        if (bound(mid) <= budget) hi = mid;
        else lo = mid + 1;
    }
    return hi;
}

struct HalflinePlan {
    long N = 0;
    long T = 0;
    Rational small;  // certified bound used below t = 1/N and for the first time window
    Rational tail;   // dropped Taylor terms
    TruncationPlan plan;
};

long cube_cap(long N) { return N > 2000 ? 8'000'000'000L : N * N * N; }

void finish_plan(HalflinePlan& hp, long n, const std::string& what) {
    TruncationPlan& plan = hp.plan;
    plan.order = hp.T;
    plan.target = n;
    plan.checks.push_back({"T <= N^3", Rational(hp.T), pow(Rational(hp.N), 3), false});
    std::ostringstream os;
    os << what << ": window 1/N with N = " << hp.N << ", Taylor degree T = " << hp.T << " around t = 1";
    plan.justification = os.str();
}

void require_time(const Rational& t) {
    if (t < 0 || t > 1) throw PreconditionError("half-line solvers take 0 <= t <= 1");
}

void require_window(const Rational& x, const Rational& x0, const Rational& x1) {
    if (x < x0 || x > x1) throw PreconditionError("x outside the declared window [x0, x1]");
}

HalflinePlan boundary_plan(const HalflineBoundaryProblem& p, const Rational& x, long n) {
    if (p.alpha <= 0) throw PreconditionError("diffusivity must be positive");
    if (p.x0 <= 0 || p.x1 < p.x0) throw PreconditionError("half-line window needs 0 < x0 <= x1");
    if (p.h.arity() != 1 || !(p.h.domain()[0].lo == PiAffine(0)) || p.h.domain()[0].hi.lower() < 2)
        throw PreconditionError("boundary data must live on [0, 2]");
    require_window(x, p.x0, p.x1);
    HalflinePlan hp;
    Rational S = p.h.sup_bound();
    Rational zsq = x * x / (4 * p.alpha), z_hi = sqrt_upper(zsq);
    Rational window = p.x0 * p.x0 / (6 * p.alpha);
    Rational isp = inv_sqrt_pi_upper(), budget = two_pow(-(n + 2));
    auto small = [&](long N) { return S * isp * z_hi * sqrt_upper(Rational(N)) * exp_neg_upper(zsq * N); };
    auto tail = [&](long N, long T) {
        return S * isp * e_upper() * z_hi * higher_arith_geom_upper(T + 1, 2, 1 - Rational(1, N));
    };
    long N = std::max(2L, static_cast<long>(ceil_int(1 / window)));
    while (Rational(1, N) * Rational(1, N) > window) ++N;
    for (;; ++N) {
        if (small(N) > budget) continue;
        long T = smallest_order([&](long T) { return tail(N, T); }, budget, 1, cube_cap(N));
        if (T < 0) continue;
        hp.N = N;
        hp.T = T;
        break;
    }
    hp.small = small(hp.N);
    hp.tail = tail(hp.N, hp.T);
    auto& plan = hp.plan;
    plan.budget_split = {{"first window", n + 2}, {"Taylor tail", n + 2}, {"time quadrature", n + 2},
                         {"rounding", n + 3}};
    plan.checks.push_back({"1/N <= x0^2/(6 alpha)", Rational(1, hp.N), window, false});
    plan.checks.push_back({"1/N^2 <= x0^2/(6 alpha)", Rational(1, hp.N) * Rational(1, hp.N), window, false});
    plan.checks.push_back({"first window bound <= 2^-(n+2)", hp.small, budget, false});
    plan.checks.push_back({"Taylor tail <= 2^-(n+2)", hp.tail, budget, false});
    finish_plan(hp, n, "boundary data");
    return hp;
}

void require_force(const HalflineForceProblem& p) {
    if (p.alpha <= 0) throw PreconditionError("diffusivity must be positive");
    if (!(p.y0 > 0 && p.y0 < p.x0 && p.x0 <= p.x1)) throw PreconditionError("force window needs 0 < y0 < x0 <= x1");
    if (p.fy.arity() != 1 || !(p.fy.domain()[0].lo == PiAffine(0)) || !(p.fy.domain()[0].hi == PiAffine(p.y0)))
        throw PreconditionError("spatial force factor must live on [0, y0]");
    if (p.fs.arity() != 1 || !(p.fs.domain()[0].lo == PiAffine(0)) || p.fs.domain()[0].hi.lower() < 1)
        throw PreconditionError("temporal force factor must cover [0, 1]");
}

HalflinePlan force_plan(const HalflineForceProblem& p, const Rational& x, long n) {
    require_force(p);
    require_window(x, p.x0, p.x1);
    HalflinePlan hp;
    Rational Sy = p.fy.sup_bound(), Ss = p.fs.sup_bound();
    Rational pref = sqrt_upper(1 / (4 * p.alpha * pi_lower()));
    Rational gap_sq = (x - p.y0) * (x - p.y0) / (4 * p.alpha);
    Rational window = (p.x0 - p.y0) * (p.x0 - p.y0) / (6 * p.alpha);
    Rational budget = two_pow(-(n + 2));
    // both image terms: int_0^{1/N} int_0^{y0} sigma^(-1/2) e^{-gap^2/sigma} <= y0 N^(-1/2) e^{-gap^2 N}
    auto small = [&](long N) { return 2 * p.y0 * Sy * Ss * pref * exp_neg_upper(gap_sq * N) / sqrt_lower(Rational(N)); };
    Rational CA = 2 * pref * p.y0 * Sy * e_upper();
    auto tail = [&](long N, long T) { return Ss * CA * higher_arith_geom_upper(T + 1, 1, 1 - Rational(1, N)); };
    long N = std::max(2L, static_cast<long>(ceil_int(1 / window)));
    for (;; ++N) {
        if (small(N) > budget) continue;
        long T = smallest_order([&](long T) { return tail(N, T); }, budget, 1, cube_cap(N));
        if (T < 0) continue;
        hp.N = N;
        hp.T = T;
        break;
    }
    hp.small = small(hp.N);
    hp.tail = tail(hp.N, hp.T);
    auto& plan = hp.plan;
    plan.budget_split = {{"first window", n + 2}, {"Taylor tail", n + 2}, {"spatial moments", n + 3},
                         {"time quadrature", n + 3}, {"rounding", n + 3}};
    plan.checks.push_back({"1/N <= (x0-y0)^2/(6 alpha)", Rational(1, hp.N), window, false});
    plan.checks.push_back({"first window bound <= 2^-(n+2)", hp.small, budget, false});
    plan.checks.push_back({"Taylor tail <= 2^-(n+2)", hp.tail, budget, false});
    finish_plan(hp, n, "source term");
    return hp;
}

struct Support {
    Rational a, b, gap;
};

Support initial_support(const HalflineInitialProblem& p, const Rational& x) {
    if (p.alpha <= 0) throw PreconditionError("diffusivity must be positive");
    if (p.g.arity() != 1 || !p.g.domain()[0].lo.is_rational() || !p.g.domain()[0].hi.is_rational())
        throw PreconditionError("initial data needs a rational support interval");
    Support s{p.g.domain()[0].lo.base, p.g.domain()[0].hi.base, 0};
    if (s.a <= 0) throw PreconditionError("initial data must be supported away from x = 0");
    if (x < s.a) s.gap = s.a - x;
    else if (x > s.b) s.gap = x - s.b;
    else throw PreconditionError("evaluation point must lie outside the support of the initial data");
    return s;
}

HalflinePlan initial_plan(const HalflineInitialProblem& p, const Rational& t, const Rational& x, long n) {
    require_time(t);
    Support sp = initial_support(p, x);
    HalflinePlan hp;
    Rational S = p.g.sup_bound();
    Rational pref = sqrt_upper(1 / (4 * p.alpha * pi_lower()));
    Rational gap_sq = sp.gap * sp.gap / (4 * p.alpha);
    Rational window = sp.gap * sp.gap / (6 * p.alpha);
    Rational budget = two_pow(-(n + 2));
    // for t <= 1/N <= gap^2/(6 alpha) the Gaussian factor t^(-1/2) e^{-gap^2/t} is increasing in t
    auto small = [&](long N) {
        return 2 * (sp.b - sp.a) * S * pref * sqrt_upper(Rational(N)) * exp_neg_upper(gap_sq * N);
    };
    long N = std::max(2L, static_cast<long>(ceil_int(1 / window)));
    while (small(N) > budget) ++N;
    hp.N = N;
    hp.small = small(N);
    auto& plan = hp.plan;
    plan.checks.push_back({"1/N <= gap^2/(6 alpha)", Rational(1, N), window, false});
    plan.checks.push_back({"small-time bound <= 2^-(n+2)", hp.small, budget, false});
    if (t >= Rational(1, N)) {
        Rational q = 1 - t;
        Rational CA = 2 * pref * (sp.b - sp.a) * S * e_upper();
        auto tail = [&](long T) { return q == 0 ? Rational(0) : CA * higher_arith_geom_upper(T + 1, 1, q); };
        hp.T = smallest_order(tail, budget, 0, cube_cap(N));
        if (hp.T < 0) throw std::runtime_error("initial-data Taylor tail does not close");
        hp.tail = tail(hp.T);
        plan.checks.push_back({"Taylor tail <= 2^-(n+2)", hp.tail, budget, false});
    }
    plan.budget_split = {{"small time", n + 2}, {"Taylor tail", n + 2}, {"moments", n + 2}, {"rounding", n + 3}};
    finish_plan(hp, n, "initial data");
    return hp;
}

Solution zero_solution(const Rational& bound, long n, TruncationPlan plan) {
    return {CertifiedValue::from_ball(Ball(0, dyadic_upper(bound)), n, 2), std::move(plan)};
}

// largest g >= 0 with 2^g v <= 1, capped so that moment targets stay modest
long log2_gain(const Dyadic& v, long cap) { return v.is_zero() ? cap : std::clamp(-v.msb() - 1, 0L, cap); }

void require_interval(const IntervalProblem& p) {
    if (p.length <= 0 || p.alpha <= 0 || p.t0 <= 0)
        throw PreconditionError("interval problem needs L > 0, alpha > 0, t0 > 0");
    if (p.g.arity() != 1 || !(p.g.domain()[0].lo == PiAffine(0)) || !(p.g.domain()[0].hi == PiAffine(p.length)))
        throw PreconditionError("interval data must live on [0, L]");
}

// exp(-alpha pi^2 t0 / L^2), the per-mode decay at the earliest time
Rational interval_decay_upper(const IntervalProblem& p) {
    return exp_neg_upper(p.alpha * pi_lower() * pi_lower() * p.t0 / (p.length * p.length));
}

Rational interval_constant(const IntervalProblem& p) {
    return 2 * p.g.sup_bound() / (1 - interval_decay_upper(p));
}

}  // namespace

CertifiedValue sine_coeff(const IntervalProblem& p, long k, long prec, const QuadratureOptions& opts) {
    require_interval(p);
    if (k < 1) throw PreconditionError("sine index starts at 1");
    Rational L = p.length;
    Rational freq = k * pi_upper() / L;
    WeightFamily weights = [k, L](const Ball& x, long w) {
        Ball y = mul(x * pi(w + 8 + bits_above(Rational(k))), Rational(k) / L, w + 8);
        return std::vector<Ball>{sin(y, w)};
    };
    WeightBounds wb{1, freq, freq * freq, k};
    long target = prec + 3 + bits_above(2 / L);
    Ball part = integrate(p.g, weights, {wb}, {target}, opts)[0];
    return CertifiedValue::from_ball(mul(part, 2 / L, target + 4), prec, 2);
}

IntervalSolver::IntervalSolver(IntervalProblem problem, QuadratureOptions opts)
    : problem_(std::move(problem)), opts_(opts) {
    require_interval(problem_);
}

TruncationPlan IntervalSolver::plan(long n) const {
    TruncationPlan plan;
    plan.target = n;
    if (problem_.g.is_zero()) {
        plan.justification = "zero initial data";
        plan.budget_split = {{"rounding", n + 1}};
        return plan;
    }
    Rational q = interval_decay_upper(problem_);
    Rational C = interval_constant(problem_);
    long K = choose_K_disk(C, q);
    long N = n + 1;
    plan.order = K * N;
    Rational threshold = C <= 1 ? rat(1, 2) : 1 / (2 * C);
    plan.checks.push_back({"q^K below " + std::string(C <= 1 ? "1/2" : "1/(2C)"), pow_upper(q, K), threshold, true});
    plan.checks.push_back({"C q^(K(n+1)) < 2^-(n+1)", C * pow_upper(q, K * N), two_pow(-N), true});
    plan.budget_split = {{"truncation", n + 1}, {"coefficients", n + 2}, {"rounding", n + 3}};
    std::ostringstream os;
    os << "q = exp(-alpha pi^2 t0/L^2) <= " << q.convert_to<double>() << ", C = 2||g||/(1-q), smallest K = " << K
       << ", " << K << "*(n+1) modes";
    plan.justification = os.str();
    return plan;
}

const IntervalSolver::Coefficients& IntervalSolver::coefficients(long n) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(n); it != cache_.end()) return *it->second;
    }
    auto co = std::make_shared<Coefficients>();
    co->plan = plan(n);
    const EvaluableFunction& g = problem_.g;
    const auto& reg = g.regularity();
    long last = co->plan.order;
    if (reg.band_limit && reg.extension == Extension::odd && *reg.band_limit <= last) {
        last = *reg.band_limit;
        co->exact_tail = true;
    }
    if (g.is_zero()) {
        last = 0;
        co->exact_tail = true;
    }
    co->sine.assign(static_cast<std::size_t>(last), Ball(0));
    if (last > 0) {
        Rational S = g.sup_bound(), q = interval_decay_upper(problem_), L = problem_.length;
        long share = n + 4 + bits_above(Rational(last)) + bits_above(2 / L);
        std::vector<long> targets;
        long kq = 0;
        for (long k = 1; k <= last; ++k) {
            long t = share - log2_gain(dyadic_upper(pow_upper(q, k * k)), share + 32);
            if (2 * S <= two_pow(-t)) break;  // |mu_k| <= 2||g|| already fits and t_k only shrinks
            targets.push_back(t);
            kq = k;
        }
        for (long k = kq + 1; k <= last; ++k) co->sine[static_cast<std::size_t>(k - 1)] = Ball(0, dyadic_upper(2 * S));
        if (kq > 0) {
            WeightFamily weights = [kq, L](const Ball& x, long p) {
                long w = p + 8 + bits_above(Rational(kq + 1));
                Ball y = mul(x * pi(w + 8 + bits_above(absr(L))), 1 / L, w + 4);
                auto ladder = rotation_ladder(y, kq + 1, w);
                std::vector<Ball> out;
                for (long k = 1; k <= kq; ++k) out.push_back(ladder[static_cast<std::size_t>(k)].second);
                return out;
            };
            std::vector<WeightBounds> bounds;
            for (long k = 1; k <= kq; ++k) {
                Rational freq = k * pi_upper() / L;
                bounds.push_back(WeightBounds{1, freq, freq * freq, k});
            }
            auto parts = integrate(g, weights, bounds, targets, opts_, &co->quadrature);
            long tmax = *std::max_element(targets.begin(), targets.end()) + 4;
            for (long k = 1; k <= kq; ++k)
                co->sine[static_cast<std::size_t>(k - 1)] = mul(parts[static_cast<std::size_t>(k - 1)], 2 / L, tmax);
        }
    }
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.emplace(n, std::move(co));
    return *it->second;
}

Solution IntervalSolver::solve(const Rational& t, const Rational& x, long n) {
    if (n < 0) throw PreconditionError("precision must be nonnegative");
    if (t < problem_.t0) throw PreconditionError("interval solver needs t >= t0");
    const Rational& L = problem_.length;
    if (x < 0 || x > L) throw PreconditionError("x outside [0, L]");
    const Coefficients& co = coefficients(n);
    if (x == 0 || x == L) return {CertifiedValue::from_ball(Ball(0), n, 2), co.plan};
    long last = static_cast<long>(co.sine.size());
    long w = n + 12 + bits_above(Rational(last + 1)) + bits_above(problem_.g.sup_bound() + 1);
    Ball u(0);
    if (last > 0) {
        Ball lambda = mul(powi(pi(w + 8), 2, w + 8), problem_.alpha * t / (L * L), w + 8);
        Ball decay = exp(-lambda, w + 8), step = decay, factor(1);
        Ball y = mul(pi(w + 8 + bits_above(absr(x) + 1)), x / L, w + 4);
        auto ladder = rotation_ladder(y, last + 1, w + 4);
        for (long k = 1; k <= last; ++k) {
            factor = round(factor * step, w + 8);  // exp(-lambda k^2)
            step = round(step * decay * decay, w + 8);
            const Ball& mu = co.sine[static_cast<std::size_t>(k - 1)];
            if (mu.mid.is_zero() && mu.rad.is_zero()) continue;
            u += round(mu * factor * ladder[static_cast<std::size_t>(k)].second, w);
        }
    }
    if (!co.exact_tail) {
        Rational C = interval_constant(problem_);
        u = u.add_error(dyadic_upper(C * pow_upper(interval_decay_upper(problem_), co.plan.order + 1)));
    }
    return {CertifiedValue::from_ball(u, n, 2), co.plan};
}

Solution solve_interval(const IntervalProblem& problem, const Rational& t, const Rational& x, long n) {
    IntervalSolver solver(problem);
    return solver.solve(t, x, n);
}

EvaluableFunction hardness_initial_interval(const Rational& length, const Rational& alpha, const Rational& t0,
                                            const Rational& x0, const EvaluableFunction& h) {
    if (length <= 0 || alpha <= 0 || t0 <= 0) throw PreconditionError("needs L > 0, alpha > 0, t0 > 0");
    if (x0 < 0 || x0 > length) throw PreconditionError("x0 must lie in [0, L]");
    if (h.arity() != 1 || !(h.domain()[0].lo == PiAffine(0)) || !(h.domain()[0].hi == PiAffine(1)))
        throw PreconditionError("hardness data must live on [0, 1]");
    const Rational L = length;
    Interval dom{0, L};
    if (h.is_zero()) return EvaluableFunction::zero({dom});
    const AxisRegularity& hr = h.regularity();
    if (!hr.lipschitz) throw PreconditionError("hardness data needs a Lipschitz bound");
    // E(y) = exp(c (y - x0)^2), c = 1/(4 pi alpha t0): |E| <= Emax, |E'| <= 2 c D Emax, |E''| <= (4 c^2 D^2 + 2c) Emax
    Rational c = 1 / (4 * pi_lower() * alpha * t0);
    Rational D = std::max(x0, Rational(L - x0));
    Rational Emax = exp_upper(c * D * D), E1 = Emax * 2 * c * D, E2 = Emax * (4 * c * c * D * D + 2 * c);
    Rational S = h.sup_bound(), Lh = *hr.lipschitz;
    AxisRegularity reg;
    reg.lipschitz = (Lh / L * Emax + S * E1) / L;
    std::vector<Segment> segs = hr.segments.empty() ? std::vector<Segment>{Segment{0, 1, -1, {}, {}}} : hr.segments;
    for (const auto& s : segs) {
        if (!s.lo.is_rational() || !s.hi.is_rational()) throw PreconditionError("hardness data needs rational knots");
        Segment out{Rational(s.lo.base * L), Rational(s.hi.base * L), s.smooth_cells_log2, std::nullopt, std::nullopt};
        Rational len = (s.hi.base - s.lo.base) * L;
        if (s.second_derivative)
            out.second_derivative = (*s.second_derivative / (L * L) * Emax + 2 * Lh / L * E1 + S * E2) / L;
        if (s.slope_variation)
            out.slope_variation = ((*s.slope_variation * Emax + Lh * E1 * len) / L + (Lh / L * E1 + S * E2) * len) / L;
        reg.segments.push_back(out);
    }
    long guard = bits_above(Emax / L + 1) + 4;
    long shift_bits = bits_above(Lh + 1);
    auto eval = [h, L, alpha, t0, x0, guard, shift_bits](std::span<const Dyadic> pt, long p) {
        Rational v = pt[0].to_rational() / L;
        return settle_with(
            [&](long w) {
                long wp = w + guard;
                Dyadic node = round_nearest(v, wp + shift_bits);
                Ball hv = h.ball(node, wp).add_error(Dyadic::pow2(-wp));
                Ball cb = div(Ball(1), mul(pi(wp + 8), 4 * alpha * t0, wp + 8), wp + 8);
                Ball d = Ball::from_rational(pt[0].to_rational() - x0, wp + 8);
                Ball E = exp(round(cb * d * d, wp + 8), wp + 4);
                return round(mul(hv * E, 1 / L, wp), wp);
            },
            p);
    };
    return EvaluableFunction({dom}, eval, lipschitz_modulus(*reg.lipschitz), S * Emax / L, {reg});
}

Solution gaussian_reduction(const EvaluableFunction& g, const Rational& alpha, const Rational& t, const Rational& x,
                            long n, const QuadratureOptions& opts) {
    if (alpha <= 0 || t <= 0) throw PreconditionError("needs alpha > 0 and t > 0");
    if (g.arity() != 1 || !g.domain()[0].lo.is_rational() || !g.domain()[0].hi.is_rational())
        throw PreconditionError("reduction needs data on a rational interval");
    Rational lo = g.domain()[0].lo.base, hi = g.domain()[0].hi.base;
    Rational c = 1 / (4 * pi_lower() * alpha * t);
    Rational D = std::max(absr(x - lo), absr(hi - x));
    WeightBounds wb{1, 2 * c * D, 4 * c * c * D * D + 2 * c, std::nullopt};
    Rational pref_up = sqrt_upper(1 / (4 * pi_lower() * t));
    long target = n + 2 + bits_above(pref_up);
    WeightFamily weights = [alpha, t, x](const Ball& y, long p) {
        Ball cb = div(Ball(1), mul(pi(p + 8), 4 * alpha * t, p + 8), p + 8);
        Ball d = y - Ball::from_rational(x, p + 8);
        return std::vector<Ball>{exp(-round(cb * d * d, p + 8), p)};
    };
    TruncationPlan plan;
    plan.target = n;
    plan.budget_split = {{"quadrature", n + 2}, {"rounding", n + 3}};
    plan.justification = "direct quadrature of the Gaussian integral";
    Ball I = integrate(g, weights, {wb}, {target}, opts)[0];
    long w = target + 8;
    Ball pref = div(Ball(1), sqrt(mul(pi(w + 8), 4 * t, w + 4), w + 4), w);
    return {CertifiedValue::from_ball(round(pref * I, w), n, 2), plan};
}

TruncationPlan plan_halfline_boundary(const HalflineBoundaryProblem& p, const Rational& x, long n) {
    return boundary_plan(p, x, n).plan;
}

TruncationPlan plan_halfline_force(const HalflineForceProblem& p, const Rational& x, long n) {
    return force_plan(p, x, n).plan;
}

TruncationPlan plan_halfline_initial(const HalflineInitialProblem& p, const Rational& t, const Rational& x, long n) {
    return initial_plan(p, t, x, n).plan;
}

Solution solve_halfline_boundary(const HalflineBoundaryProblem& p, const Rational& t, const Rational& x, long n,
                                 const QuadratureOptions& opts) {
    require_time(t);
    HalflinePlan hp = boundary_plan(p, x, n);
    if (absr(p.h(Dyadic(0), 30).to_rational()) > two_pow(-20)) throw PreconditionError("boundary data needs h(0) = 0");
    // below the window the whole integral is covered by the first-window bound
    if (t < Rational(1, hp.N)) return zero_solution(hp.small, n, hp.plan);
    Rational S = p.h.sup_bound();
    long target = n + 2;
    long w = target + bits_above(Rational(hp.N)) + bits_above(S + 1) + 48;
    Rational zsq = x * x / (4 * p.alpha), z_hi = sqrt_upper(zsq);
    Ball z = sqrt(Ball::from_rational(zsq, w + 8), w + 4);
    Ball ze = round(z * exp(Ball::from_rational(-zsq, w + 8), w + 4), w + 4);
    auto q = heat_taylor_q(zsq, hp.T + 1, w);
    TimeSeries ts;
    for (const auto& qm : q) ts.coeffs.push_back(round(ze * qm, w));
    ts.exact = [zsq, z_hi](const Rational& lo, const Rational& hi) { return boundary_kernel_bounds(zsq, z_hi, lo, hi); };
    Rational qq = 1 - Rational(1, hp.N), scale = e_upper() * z_hi;
    ts.tail = {scale * higher_arith_geom_upper(hp.T + 1, 2, qq), scale * higher_arith_geom_upper(hp.T, 3, qq),
               scale * higher_arith_geom_upper(hp.T - 1, 4, qq)};
    long evaluations = 0;
    Ball I = integrate_time(p.h, t, hp.N, ts, target, opts, evaluations);
    Ball isp = div(Ball(1), sqrt(pi(w + 8), w + 4), w);
    Ball u = round(isp * I, target + 8).add_error(dyadic_upper(hp.small + hp.tail));
    return {CertifiedValue::from_ball(u, n, 2), hp.plan};
}

Solution solve_halfline_force(const HalflineForceProblem& p, const Rational& t, const Rational& x, long n,
                              const QuadratureOptions& opts) {
    require_time(t);
    HalflinePlan hp = force_plan(p, x, n);
    if (t < Rational(1, hp.N)) return zero_solution(hp.small, n, hp.plan);
    Rational Sy = p.fy.sup_bound(), Ss = p.fs.sup_bound();
    if (Sy == 0 || Ss == 0) return zero_solution(hp.small + hp.tail, n, hp.plan);
    Rational pref_up = sqrt_upper(1 / (4 * p.alpha * pi_lower()));
    long T = hp.T;
    Rational qq = 1 - Rational(1, hp.N);
    // replacing fy by its interpolant changes u by at most eps Ss t: the Dirichlet kernel has mass <= 1
    Interpolant l = interpolate(p.fy, two_pow(-(n + 4)) / Ss);
    long goal = n + 6 + bits_above(Rational(T + 1)) + bits_above(pref_up * std::max(Ss, Rational(1)));
    auto moments = image_moments(l, p.alpha, x, T, goal);
    long evaluations = 0;
    long w = n + 8 + bits_above(Rational(hp.N)) + bits_above(Ss + 1) + 48;
    Ball pref = div(Ball(1), sqrt(mul(pi(w + 8), 4 * p.alpha, w + 4), w + 4), w + 4);
    TimeSeries ts;
    for (const auto& m : moments) ts.coeffs.push_back(round(pref * m, w));
    Rational zlo = (x - p.y0) * (x - p.y0) / (4 * p.alpha), zhi = (x + p.y0) * (x + p.y0) / (4 * p.alpha);
    Rational scale = 2 * pref_up * p.y0 * Sy;
    ts.exact = [zlo, zhi, scale](const Rational& lo, const Rational& hi) {
        auto b = gtilde_bounds(zlo, zhi, lo, hi);
        return std::array<Rational, 3>{scale * b[0], scale * b[1], scale * b[2]};
    };
    Rational CA = scale * e_upper();
    ts.tail = {CA * higher_arith_geom_upper(T + 1, 1, qq), CA * higher_arith_geom_upper(T, 2, qq),
               CA * higher_arith_geom_upper(T - 1, 3, qq)};
    Ball I = integrate_time(p.fs, t, hp.N, ts, n + 3, opts, evaluations);
    Ball u = I.add_error(dyadic_upper(hp.small + hp.tail + l.error * Ss * t));
    return {CertifiedValue::from_ball(u, n, 2), hp.plan};
}

Solution solve_halfline_initial(const HalflineInitialProblem& p, const Rational& t, const Rational& x, long n,
                                const QuadratureOptions&) {
    HalflinePlan hp = initial_plan(p, t, x, n);
    if (t < Rational(1, hp.N)) return zero_solution(hp.small, n, hp.plan);
    long T = hp.T;
    Rational wq = t - 1;
    Rational pref_up = sqrt_upper(1 / (4 * p.alpha * pi_lower()));
    Interpolant l = interpolate(p.g, two_pow(-(n + 3)));
    auto moments = image_moments(l, p.alpha, x, T, n + 4 + bits_above(Rational(T + 1)) + bits_above(pref_up));
    long w = n + 12 + bits_above(Rational(T + 1)) + bits_above(p.g.sup_bound() + 1);
    Ball wb = Ball::from_rational(wq, w + 8), acc(0);
    for (auto it = moments.rbegin(); it != moments.rend(); ++it) acc = round(acc * wb + *it, w);
    Ball pref = div(Ball(1), sqrt(mul(pi(w + 8), 4 * p.alpha, w + 4), w + 4), w + 4);
    Ball u = round(pref * acc, w).add_error(dyadic_upper(hp.tail + l.error));
    return {CertifiedValue::from_ball(u, n, 2), hp.plan};
}

CertifiedValue solve_neumann_constant_force(const EvaluableFunction& f, const Rational& t, long n,
                                            const QuadratureOptions& opts) {
    if (f.arity() != 1) throw PreconditionError("Neumann source must depend on time only");
    if (t < 0) throw PreconditionError("time must be nonnegative");
    if (t == 0) return CertifiedValue::from_ball(Ball(0), n, 2);
    const auto& dom = f.domain()[0];
    if (!(dom.lo == PiAffine(0)) || dom.hi.lower() < t) throw PreconditionError("source must cover [0, t]");
    EvaluableFunction part = dom.hi == PiAffine(t) ? f : restrict_to(f, 0, t);
    return CertifiedValue::from_ball(integrate(part, n + 1, opts), n, 2);
}

}  // namespace certheat
