#include "certheat/vocab.hpp"

#include "certheat/kernels.hpp"

#include <algorithm>

namespace certheat {

namespace {

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }

long guard_bits(const Rational& bound) { return bound > 1 ? ceil_log2(bound) + 1 : 0; }

Rational sum_abs(const std::vector<Rational>& v, long weight_power = 0, std::size_t first = 0) {
    Rational s = 0;
    for (std::size_t k = first; k < v.size(); ++k) s += absr(v[k]) * pow(Rational(static_cast<long long>(k)), weight_power);
    return s;
}

Segment whole(const Interval& d, const Rational& d2) {
    return Segment{d.lo, d.hi, 0, d2, d2 * d.length_upper()};
}

}  // namespace

AxisRegularity scaled(const AxisRegularity& r, const Rational& factor) {
    Rational f = absr(factor);
    AxisRegularity out = r;
    if (out.lipschitz) *out.lipschitz *= f;
    for (auto& s : out.segments) {
        if (s.second_derivative) *s.second_derivative *= f;
        if (s.slope_variation) *s.slope_variation *= f;
    }
    return out;
}

EvaluableFunction constant(const Rational& c, std::vector<Interval> domain) {
    if (c == 0) return EvaluableFunction::zero(std::move(domain));
    std::vector<AxisRegularity> reg(domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i) {
        reg[i].lipschitz = Rational(0);
        reg[i].segments = {whole(domain[i], 0)};
        reg[i].band_limit = 0;
        reg[i].extension = Extension::periodic;
    }
    EvaluableFunction f(
        std::move(domain), [c](std::span<const Dyadic>, long p) { return round_nearest(c, p); },
        [](long) { return 0L; }, absr(c), std::move(reg));
    f.harmonic_degree = 0;
    return f;
}

EvaluableFunction trig_polynomial(std::vector<Rational> cos_coeffs, std::vector<Rational> sin_coeffs) {
    std::size_t n = std::max(cos_coeffs.size(), sin_coeffs.size());
    cos_coeffs.resize(n);
    sin_coeffs.resize(n);
    if (n > 0) sin_coeffs[0] = 0;
    std::vector<Rational> mags(n);
    long degree = 0;
    for (std::size_t k = 0; k < n; ++k) {
        mags[k] = absr(cos_coeffs[k]) + absr(sin_coeffs[k]);
        if (mags[k] != 0) degree = static_cast<long>(k);
    }
    Rational sup = sum_abs(mags), lip = sum_abs(mags, 1), d2 = sum_abs(mags, 2);
    Interval dom{0, PiAffine(0, 2)};
    AxisRegularity reg;
    reg.lipschitz = lip;
    reg.segments = {whole(dom, d2)};
    reg.band_limit = degree;
    reg.extension = Extension::periodic;
    long guard = guard_bits(sup) + 4;
    auto eval = [cos_coeffs, sin_coeffs, guard](std::span<const Dyadic> pt, long p) {
        return settle_with(
            [&](long w) {
                long wp = w + guard;
                Ball sum = Ball::from_rational(cos_coeffs[0], wp);
                for (std::size_t k = 1; k < cos_coeffs.size(); ++k) {
                    if (cos_coeffs[k] == 0 && sin_coeffs[k] == 0) continue;
                    auto [c, s] = cos_sin(Ball(pt[0] * Dyadic(static_cast<long long>(k))), wp);
                    if (cos_coeffs[k] != 0) sum += mul(c, cos_coeffs[k], wp);
                    if (sin_coeffs[k] != 0) sum += mul(s, sin_coeffs[k], wp);
                }
                return sum;
            },
            p);
    };
    if (sup == 0) return EvaluableFunction::zero({dom});
    return EvaluableFunction({dom}, eval, lipschitz_modulus(lip), sup, {reg});
}

EvaluableFunction sine_series(const Rational& length, std::vector<Rational> coeffs) {
    if (length <= 0) throw PreconditionError("sine series needs a positive length");
    Interval dom{0, length};
    Rational sup = 0, lip = 0, d2 = 0;
    long degree = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        Rational k = static_cast<long long>(i + 1);
        Rational freq = k * pi_upper() / length;
        sup += absr(coeffs[i]);
        lip += absr(coeffs[i]) * freq;
        d2 += absr(coeffs[i]) * freq * freq;
        if (coeffs[i] != 0) degree = static_cast<long>(i + 1);
    }
    if (sup == 0) return EvaluableFunction::zero({dom});
    AxisRegularity reg;
    reg.lipschitz = lip;
    reg.segments = {whole(dom, d2)};
    reg.band_limit = degree;
    reg.extension = Extension::odd;
    long guard = guard_bits(sup) + 4;
    auto eval = [coeffs, length, guard](std::span<const Dyadic> pt, long p) {
        Rational x = pt[0].to_rational();
        return settle_with(
            [&](long w) {
                long wp = w + guard;
                Ball sum(0);
                for (std::size_t i = 0; i < coeffs.size(); ++i) {
                    if (coeffs[i] == 0) continue;
                    Rational scale = Rational(static_cast<long long>(i + 1)) * x / length;
                    long lift = scale != 0 ? std::max(0L, floor_log2(absr(scale)) + 3) : 0;
                    Ball arg = mul(pi(wp + lift + 2), scale, wp + 2);
                    sum += mul(sin(arg, wp), coeffs[i], wp);
                }
                return sum;
            },
            p);
    };
    return EvaluableFunction({dom}, eval, lipschitz_modulus(lip), sup, {reg});
}

EvaluableFunction polynomial(std::vector<Rational> coeffs, const Rational& a, const Rational& b) {
    if (!(a < b)) throw PreconditionError("polynomial domain needs a < b");
    Interval dom{a, b};
    Rational R = std::max(absr(a), absr(b));
    Rational sup = 0, lip = 0, d2 = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        long li = static_cast<long>(i);
        Rational c = absr(coeffs[i]);
        sup += c * pow(R, li);
        if (i >= 1) lip += c * li * pow(R, li - 1);
        if (i >= 2) d2 += c * li * (li - 1) * pow(R, li - 2);
    }
    if (sup == 0) return EvaluableFunction::zero({dom});
    AxisRegularity reg;
    reg.lipschitz = lip;
    reg.segments = {whole(dom, d2)};
    auto eval = [coeffs](std::span<const Dyadic> pt, long p) {
        Rational x = pt[0].to_rational(), v = 0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
        return round_nearest(v, p);
    };
    return EvaluableFunction({dom}, eval, lipschitz_modulus(lip), sup, {reg});
}

EvaluableFunction piecewise_linear(std::vector<std::pair<Rational, Rational>> knots) {
    if (knots.size() < 2) throw PreconditionError("piecewise linear table needs two knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i - 1].first < knots[i].first)) throw PreconditionError("knots must be strictly increasing");
    Interval dom{knots.front().first, knots.back().first};
    Rational sup = 0, lip = 0;
    AxisRegularity reg;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        sup = std::max(sup, absr(knots[i].second));
        if (i == 0) continue;
        Rational slope = (knots[i].second - knots[i - 1].second) / (knots[i].first - knots[i - 1].first);
        lip = std::max(lip, absr(slope));
        reg.segments.push_back(Segment{knots[i - 1].first, knots[i].first, 0, Rational(0), Rational(0)});
    }
    if (sup == 0) return EvaluableFunction::zero({dom});
    reg.lipschitz = lip;
    auto eval = [knots](std::span<const Dyadic> pt, long p) {
        Rational x = pt[0].to_rational();
        auto it = std::upper_bound(knots.begin(), knots.end(), x,
                                   [](const Rational& v, const auto& kn) { return v < kn.first; });
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - knots.begin()), 1, knots.size() - 1);
        const auto& [x0, y0] = knots[i - 1];
        const auto& [x1, y1] = knots[i];
        return round_nearest(y0 + (y1 - y0) * (x - x0) / (x1 - x0), p);
    };
    return EvaluableFunction({dom}, eval, lipschitz_modulus(lip), sup, {reg});
}

EvaluableFunction separable(EvaluableFunction fy, EvaluableFunction fs) {
    if (fy.arity() != 1 || fs.arity() != 1) throw PreconditionError("separable factors must be one-dimensional");
    std::vector<Interval> dom{fy.domain()[0], fs.domain()[0]};
    if (fy.is_zero() || fs.is_zero()) return EvaluableFunction::zero(dom);
    Rational sy = fy.sup_bound(), ss = fs.sup_bound();
    long gy = guard_bits(ss + 1) + 2, gs = guard_bits(sy + 1) + 2;
    auto eval = [fy, fs, gy, gs](std::span<const Dyadic> pt, long p) {
        Dyadic a = fy(pt[0], p + gy), b = fs(pt[1], p + gs);
        return (a * b).round_nearest(p + 1);
    };
    auto modulus = [fy, fs, gy, gs](long k) { return std::max(fy.modulus(k + gy), fs.modulus(k + gs)); };
    std::vector<AxisRegularity> reg{scaled(fy.regularity(), ss), scaled(fs.regularity(), sy)};
    return EvaluableFunction(dom, eval, modulus, sy * ss, reg);
}

EvaluableFunction sphere_harmonic_sum(std::vector<SphereTerm> terms) {
    std::vector<Interval> dom{{0, PiAffine(0, 1)}, {0, PiAffine(0, 2)}};
    // |Y_lm| <= sqrt((2l+1)/(4pi)) < sqrt(2l+1)/3, and each angular derivative is at most (l+1) times that
    Rational sup = 0, lip = 0;
    long degree = 0;
    std::erase_if(terms, [](const SphereTerm& t) { return t.coeff == 0; });
    for (const auto& t : terms) {
        if (t.l < 0 || t.m < -t.l || t.m > t.l) throw PreconditionError("spherical harmonic needs |m| <= l");
        BigInt q = 2 * t.l + 1, s = boost::multiprecision::sqrt(q);
        if (s * s < q) s += 1;
        Rational size = absr(t.coeff) * Rational(s) / 3;
        sup += size;
        lip += size * (t.l + 1);
        degree = std::max(degree, t.l);
    }
    if (terms.empty()) {
        auto f = EvaluableFunction::zero(dom);
        f.harmonic_degree = 0;
        return f;
    }
    std::vector<AxisRegularity> reg(2);
    for (auto& r : reg) r.lipschitz = lip;
    long guard = guard_bits(sup) + 4;
    auto eval = [terms, guard](std::span<const Dyadic> pt, long p) {
        return settle_with(
            [&](long w) {
                long wp = w + guard;
                auto [c, s] = cos_sin(Ball(pt[0]), wp + 4);
                Ball phi(pt[1]), sum(0);
                for (const auto& t : terms) sum += mul(real_sph_harmonic_ball(t.l, t.m, c, s, phi, wp), t.coeff, wp);
                return sum;
            },
            p);
    };
    EvaluableFunction f(dom, eval, lipschitz_modulus(lip), sup, reg);
    f.harmonic_degree = degree;
    return f;
}

}  // namespace certheat
