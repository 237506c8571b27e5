#pragma once

#include "certheat/ball.hpp"
#include "certheat/dyadic.hpp"

#include <functional>

namespace certheat {

// A dyadic approximation together with the guarantee |true - approx| <= 2^-err_exponent.
class CertifiedValue {
public:
    CertifiedValue() = default;
    CertifiedValue(DyadicDecimal approx, long err_exponent);

    // Round an enclosure to pcs = n + extra_bits; throws unless the result meets 2^-n.
    static CertifiedValue from_ball(const Ball& b, long n, long extra_bits = 0);
    static CertifiedValue exact(const Dyadic& d);

    const DyadicDecimal& approx() const { return approx_; }
    long err_exponent() const { return err_; }
    Rational value() const { return approx_.to_rational(); }
    Rational error_bound() const { return ldexp(Rational(1), -err_); }
    bool encloses(const Rational& t) const;
    Ball ball() const { return {approx_.value(), Dyadic::pow2(-err_)}; }

    // explicit final rounding to pcs bits; the exponent is re-derived from the exact total error
    CertifiedValue rounded(long pcs) const;

    friend CertifiedValue operator+(const CertifiedValue& a, const CertifiedValue& b);
    friend CertifiedValue operator-(const CertifiedValue& a, const CertifiedValue& b);
    friend CertifiedValue operator*(const CertifiedValue& a, const CertifiedValue& b);
    CertifiedValue operator-() const;

private:
    DyadicDecimal approx_;
    long err_ = 0;
};

// largest n with 2^-n >= e, for e > 0
long error_exponent_for(const Rational& e);

// Evaluate compute(w) at growing working precision until it certifies to 2^-n.
CertifiedValue certify(const std::function<Ball(long)>& compute, long n);

}  // namespace certheat
