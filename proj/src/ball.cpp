#include "certheat/ball.hpp"

#include <climits>
#include <cmath>
#include <map>
#include <mutex>

namespace certheat {

namespace mp = boost::multiprecision;

namespace {

constexpr long kRadBits = 30;

Dyadic shorten(const Dyadic& r) { return r.round_up_bits(kRadBits); }

BigInt as_integer(const Dyadic& x) {
    // x must be an integer
    if (x.exponent() >= 0) return x.mantissa() << static_cast<unsigned>(x.exponent());
    return x.floor_to(0).mantissa();
}

long bits_of(const Dyadic& x) { return x.is_zero() ? LONG_MIN / 4 : x.msb(); }

BigInt atan_inv_fixed(long k, long w, long& terms) {
    // sum_j (-1)^j floor(2^w / k^(2j+1)) / (2j+1), each term off by < 2 ulp
    BigInt k2 = BigInt(k) * k;
    BigInt pw = (BigInt(1) << static_cast<unsigned>(w)) / k;
    BigInt sum = 0;
    long j = 0;
    while (!pw.is_zero()) {
        BigInt t = pw / (2 * j + 1);
        if (j % 2 == 0) sum += t;
        else sum -= t;
        pw /= k2;
        ++j;
    }
    terms = j;
    return sum;
}

std::mutex pi_mutex;
std::map<long, Ball> pi_cache;

// Taylor sums for |r| <= 1 in fixed point at W bits. Each term carries at most 6 ulp of
// truncation error, and the alternating tail is below the last term.
std::pair<Ball, Ball> cos_sin_small(const Ball& r, long w) {
    const long W = w + 8;
    Dyadic rm = r.mid.round_nearest(W);
    Dyadic in_err = (rm - r.mid).abs() + r.rad;
    BigInt R = rm.mantissa();
    if (rm.exponent() + W > 0) R <<= static_cast<unsigned>(rm.exponent() + W);
    else R >>= static_cast<unsigned>(-(rm.exponent() + W));
    const BigInt R2 = (R * R) >> static_cast<unsigned>(W);
    BigInt c = BigInt(1) << static_cast<unsigned>(W), s = R, tc = c, ts = R;
    long terms = 1;
    for (long i = 1; !(tc.is_zero() && ts.is_zero()); ++i, ++terms) {
        tc = -((tc * R2) >> static_cast<unsigned>(W)) / ((2 * i - 1) * (2 * i));
        ts = -((ts * R2) >> static_cast<unsigned>(W)) / ((2 * i) * (2 * i + 1));
        c += tc;
        s += ts;
    }
    // cos and sin are 1-Lipschitz, so the input radius passes straight through
    Dyadic err = Dyadic(BigInt(8 * terms + 8), -W) + in_err;
    return {round(Ball(Dyadic(c, -W), err), w), round(Ball(Dyadic(s, -W), err), w)};
}

}  // namespace

Ball Ball::from_rational(const Rational& q, long p) {
    Dyadic m = certheat::round_nearest(q, p);
    return {m, (m.to_rational() == q) ? Dyadic() : Dyadic::pow2(-p - 1)};
}

Dyadic Ball::mig() const {
    Dyadic a = mid.abs() - rad;
    return a.sign() > 0 ? a : Dyadic();
}

bool Ball::contains(const Rational& q) const {
    Rational d = q - mid.to_rational();
    if (d < 0) d = -d;
    return d <= rad.to_rational();
}

Ball operator*(const Ball& a, const Ball& b) {
    Dyadic rad = a.mid.abs() * b.rad + b.mid.abs() * a.rad + a.rad * b.rad;
    return {a.mid * b.mid, shorten(rad)};
}

Ball round(const Ball& x, long p) {
    Dyadic m = x.mid.round_nearest(p);
    Dyadic err = (x.mid - m).abs();
    return {m, shorten(x.rad + err)};
}

Ball div(const Ball& a, const Ball& b, long p) {
    if (b.mig().is_zero()) throw std::domain_error("division by a ball containing zero");
    const Dyadic& B = b.mid;
    // quotient of mids truncated toward zero at 2^-p
    long shift = p + a.mid.exponent() - B.exponent();
    BigInt num = a.mid.mantissa(), den = B.mantissa();
    if (shift >= 0) num <<= static_cast<unsigned>(shift);
    else den <<= static_cast<unsigned>(-shift);
    BigInt q = num / den;
    bool inexact = q * den != num;
    Ball out{Dyadic(q, -p), inexact ? Dyadic::pow2(-p) : Dyadic()};
    if (!a.rad.is_zero() || !b.rad.is_zero()) {
        Rational Bq = B.abs().to_rational();
        Rational bound = (Bq * a.rad.to_rational() + a.mid.abs().to_rational() * b.rad.to_rational()) /
                         (Bq * (Bq - b.rad.to_rational()));
        out.rad += certheat::ceil_to(bound, p + kRadBits);
        out.rad = shorten(out.rad);
    }
    return out;
}

namespace {

// a / d for an integer d > 0: mid truncated at 2^-p, radius rounded up
Ball div_positive_int(const Ball& a, const BigInt& d, long p) {
    long shift = p + a.mid.exponent();
    BigInt num = a.mid.mantissa(), den = d;
    if (shift >= 0) num <<= static_cast<unsigned>(shift);
    else den <<= static_cast<unsigned>(-shift);
    BigInt q = num / den;
    Dyadic err = q * den != num ? Dyadic::pow2(-p) : Dyadic();
    if (!a.rad.is_zero()) {
        long s = p + kRadBits + a.rad.exponent();
        BigInt rn = a.rad.mantissa(), rd = d;
        if (s >= 0) rn <<= static_cast<unsigned>(s);
        else rd <<= static_cast<unsigned>(-s);
        BigInt rq = rn / rd;
        if (rq * rd != rn) rq += 1;
        err += Dyadic(rq, -(p + kRadBits));
    }
    return {Dyadic(q, -p), shorten(err)};
}

}  // namespace

Ball div(const Ball& a, const Rational& b, long p) {
    if (b == 0) throw std::domain_error("division by zero");
    BigInt n = boost::multiprecision::numerator(b), d = boost::multiprecision::denominator(b);
    Ball scaled{a.mid * Dyadic(d, 0), a.rad * Dyadic(d, 0)};
    if (n < 0) return -div_positive_int(scaled, BigInt(-n), p);
    return div_positive_int(scaled, n, p);
}

Ball mul(const Ball& a, const Rational& b, long p) {
    BigInt n = boost::multiprecision::numerator(b), d = boost::multiprecision::denominator(b);
    Ball scaled{a.mid * Dyadic(n, 0), a.rad * Dyadic(boost::multiprecision::abs(n), 0)};
    return div_positive_int(scaled, d, p);
}

Ball sqrt(const Ball& x, long p) {
    if (x.upper().sign() < 0) throw std::domain_error("sqrt of a negative ball");
    Dyadic m = x.mid.sign() > 0 ? x.mid : Dyadic();
    // floor(sqrt(floor(m * 4^p))) = floor(2^p sqrt(m))
    BigInt s = mp::sqrt(as_integer(m.floor_to(2 * p).ldexp(2 * p)));
    Ball out{Dyadic(s, -p), Dyadic::pow2(-p)};
    if (!x.rad.is_zero() || x.mid.sign() < 0) {
        Dyadic lo = x.lower();
        Dyadic prop;
        if (lo.sign() > 0) {
            // |sqrt(y) - sqrt(m)| <= rad / sqrt(lo)
            BigInt sl = mp::sqrt(as_integer(lo.floor_to(2 * p + 2 * kRadBits).ldexp(2 * p + 2 * kRadBits)));
            if (sl.is_zero()) sl = 1;
            Rational root_lo = Rational(sl) / Rational(BigInt(1) << static_cast<unsigned>(p + kRadBits));
            prop = certheat::ceil_to(x.rad.to_rational() / root_lo, p + kRadBits);
        } else {
            // square root is 1/2-Holder: |sqrt(y) - sqrt(m)| <= sqrt(|y - m|)
            Dyadic span = x.rad + x.mid.abs();
            BigInt sr = mp::sqrt(as_integer(span.ceil_to(2 * p + 2).ldexp(2 * p + 2))) + 1;
            prop = Dyadic(sr, -p - 1);
        }
        out.rad += prop;
    }
    out.rad = shorten(out.rad);
    return out;
}

Ball pi(long p) {
    long w = ((p + 40) / 64 + 1) * 64;
    {
        std::lock_guard lock(pi_mutex);
        auto it = pi_cache.lower_bound(w);
        if (it != pi_cache.end()) return round(it->second, p);
    }
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    long ta = 0, tb = 0;
    BigInt a = atan_inv_fixed(5, w, ta);
    BigInt b = atan_inv_fixed(239, w, tb);
    BigInt v = 16 * a - 4 * b;
    long ulps = 16 * (2 * ta + 1) + 4 * (2 * tb + 1);
    Ball val{Dyadic(v, -w), Dyadic(BigInt(ulps), -w)};
    {
        std::lock_guard lock(pi_mutex);
        pi_cache.emplace(w, val);
    }
    return round(val, p);
}

namespace {

Ball exp_point(const Dyadic& x, long p) {
    if (x.is_zero()) return Ball(1);
    long growth = x.sign() > 0 ? static_cast<long>(x.to_double() * 1.4427) + 2 : 0;
    long s = std::max(0L, x.msb() + 2);
    Dyadic y = x.ldexp(-s);
    Dyadic target = Dyadic::pow2(-p);
    for (long extra = 12;; extra += 32) {
        long w = p + s + growth + extra;
        Dyadic eps = Dyadic::pow2(-w);
        Ball sum(1), term(1);
        for (long j = 1;; ++j) {
            term = div(term * Ball(y), Rational(j), w);
            sum += term;
            if (term.mag() < eps) {
                sum = sum.add_error(term.mag());
                break;
            }
        }
        sum = round(sum, w);
        for (long i = 0; i < s; ++i) sum = round(sum * sum, w);
        if (sum.rad <= target) return sum;
    }
}

}  // namespace

Ball exp(const Ball& x, long p) {
    if (x.rad > Dyadic::pow2(-1)) throw std::domain_error("exp of a wide ball");
    if (x.rad.is_zero()) return round(exp_point(x.mid, p + 2), p);
    // exp is increasing with |exp'| <= exp(upper); e^r - 1 <= 2r for r <= 1/2
    Ball e = exp_point(x.mid, p + 2);
    Dyadic prop = shorten(e.mag() * x.rad.ldexp(1));
    return round(e.add_error(prop), p);
}

std::pair<Ball, Ball> cos_sin(const Ball& x, long p) {
    const Dyadic& m = x.mid;
    std::pair<Ball, Ball> cs;
    if (m.is_zero()) {
        cs = {Ball(1), Ball(0)};
    } else {
        long mag = std::max(0L, bits_of(m));
        for (long extra = 12;; extra += 32) {
            long w = p + extra;
            Ball half_pi = pi(w + mag + 8).ldexp(-1);
            // nearest multiple of pi/2
            BigInt k;
            if (mag < 48) {
                // any nearby integer works: the reduced argument only has to stay inside [-1, 1]
                k = BigInt(static_cast<long long>(std::llround(m.to_double() / half_pi.mid.to_double())));
            } else {
                Rational ratio = m.to_rational() / half_pi.mid.to_rational();
                k = as_integer(certheat::round_nearest(ratio, 0));
            }
            Ball r = round(Ball(m) - Ball(Dyadic(k, 0)) * half_pi, w);
            auto [c, s] = cos_sin_small(r, w);
            int quad = static_cast<int>(static_cast<long long>(k & 3));
            switch (quad) {
                case 0: cs = {c, s}; break;
                case 1: cs = {-s, c}; break;
                case 2: cs = {-c, -s}; break;
                default: cs = {s, -c}; break;
            }
            if (cs.first.rad <= Dyadic::pow2(-p - 2) && cs.second.rad <= Dyadic::pow2(-p - 2)) break;
        }
    }
    // both are 1-Lipschitz
    cs.first = round(cs.first.add_error(x.rad), p);
    cs.second = round(cs.second.add_error(x.rad), p);
    return cs;
}

Ball cos(const Ball& x, long p) { return cos_sin(x, p).first; }
Ball sin(const Ball& x, long p) { return cos_sin(x, p).second; }

Ball powi(const Ball& x, long k, long p) {
    if (k < 0) throw std::domain_error("negative power");
    long w = p + 4;
    for (long t = k; t > 0; t >>= 1) ++w;
    Ball result(1), base = x;
    while (k > 0) {
        if (k & 1) result = round(result * base, w);
        k >>= 1;
        if (k > 0) base = round(base * base, w);
    }
    return round(result, p);
}

Dyadic settle(const Ball& x, long p) {
    Dyadic m = x.mid.round_nearest(p);
    Dyadic err = (x.mid - m).abs() + x.rad;
    if (err > Dyadic::pow2(-p)) throw std::runtime_error("ball too wide to settle at the requested precision");
    return m;
}

Rational upper_rational(const Ball& x) { return x.upper().to_rational(); }
Rational lower_rational(const Ball& x) { return x.lower().to_rational(); }

}  // namespace certheat
