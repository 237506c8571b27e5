#include "certheat/function.hpp"

#include <algorithm>

namespace certheat {

Rational pi_upper() { return rat(355, 113); }
Rational pi_lower() { return rat(333, 106); }

Ball PiAffine::value(long p) const {
    if (is_rational()) return Ball::from_rational(base, p);
    Ball v = mul(pi(p + 4 + std::max(0L, floor_log2(pi_coeff < 0 ? Rational(-pi_coeff) : pi_coeff) + 2)),
                 pi_coeff, p + 2);
    return round(v + Ball::from_rational(base, p + 2), p);
}

Rational PiAffine::upper() const { return base + pi_coeff * (pi_coeff > 0 ? pi_upper() : pi_lower()); }
Rational PiAffine::lower() const { return base + pi_coeff * (pi_coeff > 0 ? pi_lower() : pi_upper()); }

std::string PiAffine::str() const {
    if (is_rational()) return base.str();
    std::string s = pi_coeff.str() + "*pi";
    if (base != 0) s = base.str() + "+" + s;
    return s;
}

EvaluableFunction::EvaluableFunction(std::vector<Interval> domain, Evaluator eval, Modulus modulus, Rational sup_bound,
                                     std::vector<AxisRegularity> regularity)
    : domain_(std::move(domain)),
      eval_(std::move(eval)),
      modulus_(std::move(modulus)),
      sup_(std::move(sup_bound)),
      reg_(std::move(regularity)) {
    if (domain_.empty()) throw PreconditionError("function needs at least one axis");
    if (sup_ < 0) throw PreconditionError("sup bound must be nonnegative");
    reg_.resize(domain_.size());
}

EvaluableFunction EvaluableFunction::zero(std::vector<Interval> domain) {
    std::vector<AxisRegularity> reg(domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i) {
        reg[i].lipschitz = Rational(0);
        reg[i].segments = {Segment{domain[i].lo, domain[i].hi, 0, Rational(0), Rational(0)}};
    }
    EvaluableFunction f(
        std::move(domain), [](std::span<const Dyadic>, long) { return Dyadic(); }, [](long) { return 0L; },
        Rational(0), std::move(reg));
    f.zero_ = true;
    return f;
}

Dyadic EvaluableFunction::operator()(std::span<const Dyadic> point, long p) const {
    if (point.size() != domain_.size()) throw PreconditionError("point has the wrong number of coordinates");
    for (std::size_t i = 0; i < point.size(); ++i) {
        Rational x = point[i].to_rational();
        if (x < domain_[i].lo.lower() || x > domain_[i].hi.upper())
            throw PreconditionError("point outside the function's domain");
    }
    if (zero_) return {};
    return eval_(point, p);
}

DyadicDecimal EvaluableFunction::eval(const DyadicDecimal& point, long n) const {
    Dyadic x = point.value();
    // evaluate one bit finer, then round to n bits: 2^-(n+1) + 2^-(n+1)
    Dyadic v = (*this)(x, n + 1).round_nearest(n);
    return DyadicDecimal::from_dyadic(v, std::max(n, 1L));
}

EvaluableFunction::Modulus lipschitz_modulus(const Rational& lipschitz) {
    long shift = lipschitz > 1 ? ceil_log2(lipschitz) : 0;
    return [shift](long k) { return std::max(0L, k + shift); };
}

EvaluableFunction restrict_to(const EvaluableFunction& f, const Rational& lo, const Rational& hi) {
    if (f.arity() != 1) throw PreconditionError("restriction needs a one-dimensional function");
    const auto& dom = f.domain()[0];
    if (!(lo < hi) || lo < dom.lo.lower() || hi > dom.hi.upper())
        throw PreconditionError("restriction must lie inside the domain");
    std::vector<Interval> sub{{lo, hi}};
    if (f.is_zero()) return EvaluableFunction::zero(sub);
    const auto& reg = f.regularity();
    AxisRegularity out;
    out.lipschitz = reg.lipschitz;
    bool rational_cuts = std::all_of(reg.segments.begin(), reg.segments.end(),
                                     [](const Segment& s) { return s.lo.is_rational() && s.hi.is_rational(); });
    if (rational_cuts) {
        for (const auto& s : reg.segments) {
            Rational a = std::max(s.lo.base, lo), b = std::min(s.hi.base, hi);
            if (!(a < b)) continue;
            Segment piece{a, b, -1, std::nullopt, s.slope_variation};
            // clipping breaks the equal-cell layout unless the piece was smooth throughout
            if (s.smooth_cells_log2 == 0) {
                piece.smooth_cells_log2 = 0;
                piece.second_derivative = s.second_derivative;
            }
            out.segments.push_back(std::move(piece));
        }
    }
    return EvaluableFunction(
        sub, [f](std::span<const Dyadic> pt, long p) { return f(pt, p); }, [f](long k) { return f.modulus(k); },
        f.sup_bound(), {out});
}

Dyadic settle_with(const std::function<Ball(long)>& compute, long p) {
    for (long extra = 4; extra < 4096; extra *= 2) {
        Ball b = compute(p + extra);
        Dyadic m = b.mid.round_nearest(p + 1);
        if ((b.mid - m).abs() + b.rad <= Dyadic::pow2(-p)) return m;
    }
    throw std::runtime_error("evaluation failed to settle");
}

}  // namespace certheat
