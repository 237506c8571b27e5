#pragma once

#include "certheat/dyadic.hpp"

#include <utility>

namespace certheat {

// Closed ball [mid - rad, mid + rad]. Arithmetic on mid is exact; only round() and the
// transcendental helpers drop bits, and they always fold the loss into rad.
struct Ball {
    Dyadic mid;
    Dyadic rad;  // >= 0

    Ball() = default;
    Ball(Dyadic m, Dyadic r = {}) : mid(std::move(m)), rad(std::move(r)) {}  // NOLINT
    Ball(long long v) : mid(v) {}                                           // NOLINT

    static Ball from_rational(const Rational& q, long p);

    Dyadic lower() const { return mid - rad; }
    Dyadic upper() const { return mid + rad; }
    Dyadic mag() const { return mid.abs() + rad; }     // upper bound of |x|
    Dyadic mig() const;                                  // lower bound of |x|
    bool contains(const Rational& q) const;
    bool positive() const { return lower() > Dyadic(0); }
    bool nonnegative() const { return lower() >= Dyadic(0); }

    Ball operator-() const { return {-mid, rad}; }
    friend Ball operator+(const Ball& a, const Ball& b) { return {a.mid + b.mid, a.rad + b.rad}; }
    friend Ball operator-(const Ball& a, const Ball& b) { return {a.mid - b.mid, a.rad + b.rad}; }
    friend Ball operator*(const Ball& a, const Ball& b);
    Ball& operator+=(const Ball& o) { return *this = *this + o; }
    Ball& operator-=(const Ball& o) { return *this = *this - o; }
    Ball& operator*=(const Ball& o) { return *this = *this * o; }

    Ball ldexp(long k) const { return {mid.ldexp(k), rad.ldexp(k)}; }
    Ball add_error(const Dyadic& e) const { return {mid, rad + e.abs()}; }
};

// round mid to a multiple of 2^-p and keep rad short; the result encloses the input
Ball round(const Ball& x, long p);
Ball div(const Ball& a, const Ball& b, long p);
Ball div(const Ball& a, const Rational& b, long p);
Ball mul(const Ball& a, const Rational& b, long p);
Ball sqrt(const Ball& x, long p);
Ball exp(const Ball& x, long p);
Ball cos(const Ball& x, long p);
Ball sin(const Ball& x, long p);
std::pair<Ball, Ball> cos_sin(const Ball& x, long p);
Ball pi(long p);
Ball powi(const Ball& x, long k, long p);

// Dyadic within 2^-p of the enclosed value, or throws if the ball is too wide.
Dyadic settle(const Ball& x, long p);

// rational upper bound on a ball's upper end
Rational upper_rational(const Ball& x);
Rational lower_rational(const Ball& x);

}  // namespace certheat
