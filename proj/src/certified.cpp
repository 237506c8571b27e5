#include "certheat/certified.hpp"

#include <algorithm>

namespace certheat {

namespace {

DyadicDecimal literal(const Dyadic& d, long pcs) { return DyadicDecimal::from_dyadic(d, std::max(pcs, 1L)); }

long pcs_needed(const Dyadic& d) {
    Dyadic n = d.normalized();
    return n.is_zero() ? 1 : std::max(1L, -n.exponent());
}

}  // namespace

CertifiedValue::CertifiedValue(DyadicDecimal approx, long err_exponent) : approx_(std::move(approx)), err_(err_exponent) {
    if (approx_.pcs() < err_) throw PreconditionError("printed digits fewer than the claimed precision");
}

CertifiedValue CertifiedValue::from_ball(const Ball& b, long n, long extra_bits) {
    Dyadic d = b.mid.round_nearest(n + extra_bits);
    if ((b.mid - d).abs() + b.rad > Dyadic::pow2(-n))
        throw std::runtime_error("enclosure too wide for the requested precision");
    return {literal(d, n + extra_bits), n};
}

CertifiedValue CertifiedValue::exact(const Dyadic& d) {
    long pcs = pcs_needed(d);
    return {literal(d, pcs), pcs};
}

bool CertifiedValue::encloses(const Rational& t) const {
    Rational diff = value() - t;
    if (diff < 0) diff = -diff;
    return diff <= error_bound();
}

long error_exponent_for(const Rational& e) {
    if (e <= 0) throw std::domain_error("error bound must be positive");
    return -ceil_log2(e);
}

CertifiedValue certify(const std::function<Ball(long)>& compute, long n) {
    for (long extra = 4; extra < 4096; extra *= 2) {
        Ball b = compute(n + extra);
        Dyadic d = b.mid.round_nearest(n);
        if ((b.mid - d).abs() + b.rad <= Dyadic::pow2(-n)) return CertifiedValue::from_ball(b, n);
    }
    throw std::runtime_error("value failed to certify at the requested precision");
}

CertifiedValue CertifiedValue::rounded(long pcs) const {
    Dyadic d = approx_.value().round_nearest(pcs);
    Rational total = error_bound() + (d - approx_.value()).abs().to_rational();
    long n = std::min(error_exponent_for(total), std::max(pcs, 1L));
    return {literal(d, pcs), n};
}

CertifiedValue operator+(const CertifiedValue& a, const CertifiedValue& b) {
    Dyadic s = a.approx_.value() + b.approx_.value();
    long pcs = std::max(a.approx_.pcs(), b.approx_.pcs());
    return {literal(s, pcs), std::min(a.err_, b.err_) - 1};
}

CertifiedValue operator-(const CertifiedValue& a, const CertifiedValue& b) { return a + (-b); }

CertifiedValue CertifiedValue::operator-() const {
    DyadicDecimal neg(!approx_.negative() && !approx_.magnitude().is_zero(), approx_.magnitude(), approx_.pcs());
    return {neg, err_};
}

CertifiedValue operator*(const CertifiedValue& a, const CertifiedValue& b) {
    Dyadic x = a.approx_.value(), y = b.approx_.value();
    // |XY - xy| <= |x| eb + |y| ea + ea eb
    Rational ea = a.error_bound(), eb = b.error_bound();
    Rational bound = x.abs().to_rational() * eb + y.abs().to_rational() * ea + ea * eb;
    long pcs = a.approx_.pcs() + b.approx_.pcs();
    return {literal(x * y, pcs), std::min(error_exponent_for(bound), pcs)};
}

}  // namespace certheat
