#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace certheat {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Exact binary rational mantissa * 2^exponent. Never rounds on its own.
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(long long v) : m_(v) {}  // NOLINT(google-explicit-constructor)
    Dyadic(BigInt m, long e) : m_(std::move(m)), e_(e) {}

    static Dyadic pow2(long e) { return {BigInt(1), e}; }

    const BigInt& mantissa() const { return m_; }
    long exponent() const { return e_; }

    int sign() const { return m_.sign(); }
    bool is_zero() const { return m_.is_zero(); }

    // floor(log2 |x|); undefined for zero
    long msb() const;

    Rational to_rational() const;
    double to_double() const;

    Dyadic operator-() const { return {-m_, e_}; }
    Dyadic abs() const { return {boost::multiprecision::abs(m_), e_}; }
    Dyadic ldexp(long k) const { return {m_, e_ + k}; }

    Dyadic& operator+=(const Dyadic& o);
    Dyadic& operator-=(const Dyadic& o);
    Dyadic& operator*=(const Dyadic& o);

    friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
    friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
    friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }

    friend bool operator==(const Dyadic& a, const Dyadic& b) { return cmp(a, b) == 0; }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
        int c = cmp(a, b);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    // Rounding to a multiple of 2^-p.
    Dyadic round_nearest(long p) const;  // ties to even
    Dyadic floor_to(long p) const;
    Dyadic ceil_to(long p) const;

    // Keep `bits` significant bits, rounding away from zero (used for radii).
    Dyadic round_up_bits(long bits) const;

    // strip trailing zero bits of the mantissa
    Dyadic normalized() const;

    std::string str() const;

private:
    static int cmp(const Dyadic& a, const Dyadic& b);

    BigInt m_{0};
    long e_ = 0;
};

// Shared helpers on exact rationals.
long floor_log2(const Rational& q);  // q > 0
long ceil_log2(const Rational& q);   // q > 0
Dyadic round_nearest(const Rational& q, long p);
Dyadic floor_to(const Rational& q, long p);
Dyadic ceil_to(const Rational& q, long p);
Rational pow(const Rational& q, long k);
Rational ldexp(const Rational& q, long k);
Rational rat(long long num, long long den = 1);

// Textual form [+|-][bits].[bits]; value = magnitude * 2^-pcs.
class DyadicDecimal {
public:
    DyadicDecimal() = default;
    DyadicDecimal(bool negative, BigInt magnitude, long pcs);

    static DyadicDecimal parse(std::string_view text);
    static DyadicDecimal from_dyadic(const Dyadic& d, long pcs);  // d must be a multiple of 2^-pcs

    std::string str() const;

    bool negative() const { return neg_; }
    const BigInt& magnitude() const { return mag_; }
    long pcs() const { return pcs_; }
    long tnd() const;

    Dyadic value() const;
    Rational to_rational() const { return value().to_rational(); }

    friend bool operator==(const DyadicDecimal&, const DyadicDecimal&) = default;

private:
    bool neg_ = false;
    BigInt mag_{0};
    long pcs_ = 1;
};

bool approximates(const DyadicDecimal& d, const Rational& t);
DyadicDecimal round_to(const Rational& x, long n);

// Grid point j * 2^-n of the fractional dyadic set in [0,1], 0 <= j <= 2^n.
DyadicDecimal unit_grid_point(const BigInt& j, long n);

}  // namespace certheat
