#include "certheat/dyadic.hpp"

#include <cmath>

namespace certheat {

namespace mp = boost::multiprecision;

namespace {

BigInt shl(const BigInt& m, long k) { return k == 0 ? m : BigInt(m << static_cast<unsigned>(k)); }

// floor(|m| / 2^k) for k > 0, with remainder flags
struct Shifted {
    BigInt q;
    bool exact;
    int half_cmp;  // compares remainder to 2^(k-1): -1, 0, +1
};

Shifted shr_mag(const BigInt& mag, long k) {
    if (k <= 0) return {shl(mag, -k), true, -1};
    auto uk = static_cast<unsigned>(k);
    BigInt q = mag >> uk;
    BigInt rem = mag - (q << uk);
    if (rem.is_zero()) return {std::move(q), true, -1};
    BigInt half = BigInt(1) << (uk - 1);
    int c = rem < half ? -1 : (rem == half ? 0 : 1);
    return {std::move(q), false, c};
}

}  // namespace

long Dyadic::msb() const {
    if (m_.is_zero()) throw std::domain_error("msb of zero");
    return static_cast<long>(mp::msb(mp::abs(m_))) + e_;
}

Rational Dyadic::to_rational() const {
    if (e_ >= 0) return Rational(shl(m_, e_));
    return Rational(m_, BigInt(1) << static_cast<unsigned>(-e_));
}

double Dyadic::to_double() const {
    if (m_.is_zero()) return 0.0;
    BigInt a = mp::abs(m_);
    long top = static_cast<long>(mp::msb(a));
    long drop = top > 60 ? top - 60 : 0;
    double r = static_cast<double>(static_cast<std::uint64_t>(a >> static_cast<unsigned>(drop)));
    r = std::ldexp(r, static_cast<int>(drop + e_));
    return m_.sign() < 0 ? -r : r;
}

Dyadic& Dyadic::operator+=(const Dyadic& o) {
    if (o.m_.is_zero()) return *this;
    if (m_.is_zero()) return *this = o;
    if (e_ == o.e_) {
        m_ += o.m_;
    } else if (e_ < o.e_) {
        m_ += shl(o.m_, o.e_ - e_);
    } else {
        m_ = shl(m_, e_ - o.e_) + o.m_;
        e_ = o.e_;
    }
    return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& o) { return *this += -o; }

Dyadic& Dyadic::operator*=(const Dyadic& o) {
    m_ *= o.m_;
    e_ += o.e_;
    return *this;
}

int Dyadic::cmp(const Dyadic& a, const Dyadic& b) {
    int sa = a.m_.sign(), sb = b.m_.sign();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    // same sign: compare by magnitude position first to avoid big shifts
    long ma = a.msb(), mb = b.msb();
    if (ma != mb) return (ma < mb ? -1 : 1) * sa;
    if (a.e_ == b.e_) return a.m_.compare(b.m_) < 0 ? -1 : (a.m_ == b.m_ ? 0 : 1);
    if (a.e_ < b.e_) {
        int c = a.m_.compare(shl(b.m_, b.e_ - a.e_));
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    int c = shl(a.m_, a.e_ - b.e_).compare(b.m_);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

Dyadic Dyadic::round_nearest(long p) const {
    if (e_ >= -p || m_.is_zero()) return *this;
    Shifted s = shr_mag(mp::abs(m_), -p - e_);
    BigInt q = std::move(s.q);
    if (!s.exact && (s.half_cmp > 0 || (s.half_cmp == 0 && mp::bit_test(q, 0)))) q += 1;
    return {m_.sign() < 0 ? BigInt(-q) : q, -p};
}

Dyadic Dyadic::floor_to(long p) const {
    if (e_ >= -p || m_.is_zero()) return *this;
    Shifted s = shr_mag(mp::abs(m_), -p - e_);
    if (m_.sign() < 0) {
        if (!s.exact) s.q += 1;
        return {-s.q, -p};
    }
    return {s.q, -p};
}

Dyadic Dyadic::ceil_to(long p) const { return -((-*this).floor_to(p)); }

Dyadic Dyadic::round_up_bits(long bits) const {
    if (m_.is_zero()) return *this;
    BigInt a = mp::abs(m_);
    long top = static_cast<long>(mp::msb(a)) + 1;
    if (top <= bits) return *this;
    Shifted s = shr_mag(a, top - bits);
    if (!s.exact) s.q += 1;
    return {m_.sign() < 0 ? BigInt(-s.q) : s.q, e_ + top - bits};
}

Dyadic Dyadic::normalized() const {
    if (m_.is_zero()) return {};
    auto z = mp::lsb(mp::abs(m_));
    if (z == 0) return *this;
    return {BigInt(m_ >> z), e_ + static_cast<long>(z)};
}

std::string Dyadic::str() const { return m_.str() + "*2^" + std::to_string(e_); }

long floor_log2(const Rational& q) {
    if (q <= 0) throw std::domain_error("floor_log2 of nonpositive value");
    const BigInt& n = mp::numerator(q);
    const BigInt& d = mp::denominator(q);
    long l = static_cast<long>(mp::msb(n)) - static_cast<long>(mp::msb(d));
    // 2^l <= q  <=>  n >= d*2^l
    bool ge = l >= 0 ? n >= shl(d, l) : shl(n, -l) >= d;
    return ge ? l : l - 1;
}

long ceil_log2(const Rational& q) {
    long f = floor_log2(q);
    return ldexp(Rational(1), f) == q ? f : f + 1;
}

Rational ldexp(const Rational& q, long k) {
    if (k >= 0) return q * Rational(shl(BigInt(1), k));
    return q / Rational(shl(BigInt(1), -k));
}

Rational pow(const Rational& q, long k) {
    if (k < 0) return Rational(1) / pow(q, -k);
    auto uk = static_cast<unsigned>(k);
    return Rational(mp::pow(mp::numerator(q), uk), mp::pow(mp::denominator(q), uk));
}

Rational rat(long long num, long long den) { return Rational(BigInt(num), BigInt(den)); }

Dyadic floor_to(const Rational& q, long p) {
    Rational s = ldexp(q, p);
    BigInt n = mp::numerator(s), d = mp::denominator(s);
    BigInt f = n / d;
    if (n.sign() < 0 && f * d != n) f -= 1;
    return {f, -p};
}

Dyadic ceil_to(const Rational& q, long p) { return -floor_to(-q, p); }

Dyadic round_nearest(const Rational& q, long p) {
    Rational s = ldexp(q, p);
    BigInt n = mp::numerator(s), d = mp::denominator(s);
    BigInt f = n / d;
    if (n.sign() < 0 && f * d != n) f -= 1;
    BigInt twice_rem = 2 * (n - f * d);
    if (twice_rem > d || (twice_rem == d && mp::bit_test(f, 0))) f += 1;
    return {f, -p};
}

DyadicDecimal::DyadicDecimal(bool negative, BigInt magnitude, long pcs)
    : neg_(negative), mag_(std::move(magnitude)), pcs_(pcs) {
    if (pcs_ < 1) throw PreconditionError("dyadic decimal needs at least one fractional bit");
    if (mag_.sign() < 0) throw PreconditionError("dyadic decimal magnitude must be nonnegative");
}

DyadicDecimal DyadicDecimal::parse(std::string_view text) {
    if (text.empty() || (text[0] != '+' && text[0] != '-'))
        throw PreconditionError("dyadic literal must start with '+' or '-'");
    bool neg = text[0] == '-';
    auto dot = text.find('.');
    if (dot == std::string_view::npos) throw PreconditionError("dyadic literal lacks '.'");
    std::string_view ip = text.substr(1, dot - 1);
    std::string_view fp = text.substr(dot + 1);
    if (fp.empty()) throw PreconditionError("dyadic literal needs fractional bits");
    if (!ip.empty() && ip[0] != '1') throw PreconditionError("integer bits must start with 1");
    BigInt mag = 0;
    for (std::string_view part : {ip, fp})
        for (char c : part) {
            if (c != '0' && c != '1') throw PreconditionError("dyadic literal holds a non-binary digit");
            mag = (mag << 1) + (c - '0');
        }
    return {neg, mag, static_cast<long>(fp.size())};
}

DyadicDecimal DyadicDecimal::from_dyadic(const Dyadic& d, long pcs) {
    if (pcs < 1) throw PreconditionError("pcs must be positive");
    Dyadic scaled = d.ldexp(pcs);
    if (scaled.exponent() < 0 && scaled.floor_to(0) != scaled)
        throw PreconditionError("value is not a multiple of 2^-pcs");
    BigInt m = scaled.exponent() >= 0 ? BigInt(scaled.mantissa() << static_cast<unsigned>(scaled.exponent()))
                                      : BigInt(scaled.floor_to(0).mantissa());
    return {m.sign() < 0, mp::abs(m), pcs};
}

long DyadicDecimal::tnd() const {
    long bits = mag_.is_zero() ? 0 : static_cast<long>(mp::msb(mag_)) + 1;
    return std::max(bits, pcs_);
}

std::string DyadicDecimal::str() const {
    std::string bits;
    if (!mag_.is_zero()) {
        long n = static_cast<long>(mp::msb(mag_)) + 1;
        bits.reserve(static_cast<std::size_t>(n));
        for (long i = n - 1; i >= 0; --i) bits.push_back(mp::bit_test(mag_, static_cast<unsigned>(i)) ? '1' : '0');
    }
    if (static_cast<long>(bits.size()) < pcs_) bits.insert(0, static_cast<std::size_t>(pcs_) - bits.size(), '0');
    std::size_t ilen = bits.size() - static_cast<std::size_t>(pcs_);
    std::string out(1, neg_ ? '-' : '+');
    out += bits.substr(0, ilen);
    out += '.';
    out += bits.substr(ilen);
    return out;
}

Dyadic DyadicDecimal::value() const { return {neg_ ? BigInt(-mag_) : mag_, -pcs_}; }

bool approximates(const DyadicDecimal& d, const Rational& t) {
    Rational diff = d.to_rational() - t;
    if (diff < 0) diff = -diff;
    return diff <= ldexp(Rational(1), -d.pcs());
}

DyadicDecimal round_to(const Rational& x, long n) {
    if (n < 0) throw PreconditionError("round_to needs n >= 0");
    // n = 0 still prints one fractional bit, which is then zero
    Dyadic r = round_nearest(x, n);
    return DyadicDecimal::from_dyadic(r, std::max(n, 1L));
}

DyadicDecimal unit_grid_point(const BigInt& j, long n) {
    if (n < 0 || j < 0 || j > (BigInt(1) << static_cast<unsigned>(n)))
        throw PreconditionError("grid index outside 0..2^n");
    long pcs = std::max(n, 1L);
    return {false, BigInt(j << static_cast<unsigned>(pcs - n)), pcs};
}

}  // namespace certheat
