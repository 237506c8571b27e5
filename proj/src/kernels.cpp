#include "certheat/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace certheat {

namespace mp = boost::multiprecision;

namespace {

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }

long mag_bits(const Rational& q) { return q == 0 ? 0 : std::max(0L, floor_log2(absr(q)) + 1); }

Rational factorial(long n) {
    BigInt f = 1;
    for (long i = 2; i <= n; ++i) f *= i;
    return Rational(f);
}

Rational binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    BigInt b = 1;
    for (long i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return Rational(b);
}

// generalized binomial coefficient a(a-1)...(a-k+1)/k!
Rational binomial(const Rational& a, long k) {
    Rational b = 1;
    for (long i = 0; i < k; ++i) b *= (a - i) / Rational(i + 1);
    return b;
}

// Gamma(3/2 + n) / Gamma(3/2 + n - m) = prod_{j=n-m}^{n-1} (3/2 + j)
Rational gamma_ratio(long n, long m) {
    Rational r = 1;
    for (long j = n - m; j <= n - 1; ++j) r *= rat(3, 2) + j;
    return r;
}

Ball exp_sqrt_factor(const Rational& t, const Rational& x, long w) {
    // sqrt(t) exp(-x^2/t)
    Ball e = exp(Ball::from_rational(-(x * x) / t, w + 2), w);
    Ball s = sqrt(Ball::from_rational(t, w + 2), w);
    return round(e * s, w);
}

void require_positive_time(const Rational& t) {
    if (t <= 0) throw PreconditionError("heat kernel derivatives need t > 0");
}

BigInt isqrt_ceil(const BigInt& v) {
    BigInt s = mp::sqrt(v);
    return s * s == v ? s : BigInt(s + 1);
}

}  // namespace

Rational e_upper() { return rat(27183, 10000); }
Rational e_lower() { return rat(27182, 10000); }

Ball poisson_kernel_ball(const Rational& r, const Ball& angle_diff, long p) {
    if (!(r >= 0 && r < 1)) throw PreconditionError("Poisson kernel needs 0 <= r < 1");
    if (r == 0) return Ball(1);
    long guard = 2 * mag_bits(1 / (1 - r)) + 6;
    long w = p + guard;
    Ball c = cos(angle_diff, w);
    Ball den = Ball::from_rational(1 + r * r, w) - mul(c, 2 * r, w);
    return div(Ball::from_rational(1 - r * r, w), den, p + 2);
}

CertifiedValue poisson_kernel_2d(const Rational& r, const PiAffine& theta, const PiAffine& tau, long prec) {
    if (!(r >= 0 && r < 1)) throw PreconditionError("Poisson kernel needs 0 <= r < 1");
    PiAffine diff = theta - tau;
    return certify([&](long w) { return poisson_kernel_ball(r, diff.value(w + 8), w); }, prec);
}

Rational heat_g_rational(long n, const Rational& t, const Rational& x) {
    require_positive_time(t);
    if (n < 0) throw PreconditionError("derivative order must be nonnegative");
    Rational sum = 0;
    for (long m = 0; m <= n; ++m) {
        Rational term = pow(x, 2 * (n - m)) * pow(t, -(2 * n - m + 2)) * binomial(n, m) * gamma_ratio(n, m);
        sum += (m % 2 == 0) ? term : Rational(-term);
    }
    return sum;
}

Ball heat_g_ball(long n, const Rational& t, const Rational& x, long p) {
    require_positive_time(t);
    if (x == 0) return Ball(0);
    Rational coeff = x * heat_g_rational(n, t, x);
    long w = p + mag_bits(coeff) + mag_bits(t) + 4;
    return mul(exp_sqrt_factor(t, x, w), coeff, p + 1);
}

CertifiedValue heat_g(long n, const Rational& t, const Rational& x, long prec) {
    require_positive_time(t);
    return certify([&](long w) { return heat_g_ball(n, t, x, w); }, prec);
}

namespace {

Ball tilde_with(long n, const Rational& t, const Rational& x, long p, bool leibniz) {
    require_positive_time(t);
    if (x <= 0) throw PreconditionError("the tilde family needs x > 0");
    Rational coeff = t * heat_g_rational(n, t, x);
    if (n >= 1) coeff += (leibniz ? Rational(n) : Rational(1)) * heat_g_rational(n - 1, t, x);
    long w = p + mag_bits(coeff) + mag_bits(t) + 4;
    return mul(exp_sqrt_factor(t, x, w), coeff, p + 1);
}

}  // namespace

Ball heat_g_tilde_ball(long n, const Rational& t, const Rational& x, long p) { return tilde_with(n, t, x, p, true); }

Ball heat_g_tilde_printed_ball(long n, const Rational& t, const Rational& x, long p) {
    return tilde_with(n, t, x, p, false);
}

CertifiedValue heat_g_tilde(long n, const Rational& t, const Rational& x, long prec) {
    require_positive_time(t);
    if (x <= 0) throw PreconditionError("the tilde family needs x > 0");
    return certify([&](long w) { return heat_g_tilde_ball(n, t, x, w); }, prec);
}

std::vector<Ball> heat_taylor_q(const Rational& xi_sq, long count, long p) {
    std::vector<Ball> q;
    if (count <= 0) return q;
    // Run the recurrence on d_k = q_k + q_{k-1}:
    //   (k+1) d_{k+1} = xi^2 q_k - (k + 1/2) d_k,  q_{k+1} = d_{k+1} - q_k.
    // The plain three-term form doubles ball radii every step; here they grow like exp(2 xi sqrt(k)).
    double spread = 3.0 * std::sqrt(xi_sq.convert_to<double>() * static_cast<double>(count));
    long w = p + static_cast<long>(spread) + 2 * mag_bits(Rational(count)) + mag_bits(xi_sq) + 8;
    Ball xi = Ball::from_rational(xi_sq, w);
    Ball qk(1), dk(1);
    q.push_back(qk);
    for (long k = 0; k + 1 < count; ++k) {
        Ball next = xi * qk - mul(dk, Rational(k) + rat(1, 2), w);
        dk = div(round(next, w), Rational(k + 1), w);
        qk = dk - qk;
        q.push_back(round(qk, p + 8));
    }
    return q;
}

Rational heat_coeff_bound(long k, const Rational& x) {
    BigInt kp = k + 1;
    return e_upper() * x * Rational(kp) * Rational(isqrt_ceil(kp));
}

Rational growth_constant(const Rational& x0) {
    if (x0 <= 0) throw PreconditionError("x0 must be positive");
    static std::mutex mutex;
    static std::map<Rational, Rational> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(x0); it != cache.end()) return it->second;
    }
    constexpr long n_cal = 10;
    constexpr long grid = 40;
    auto grid_max = [&](long n_lo, long n_hi) {
        Rational best = 0;
        for (long i = 1; i <= grid; ++i) {
            Rational x = x0 * i / grid;
            Rational damp = upper_rational(exp(Ball::from_rational(-(x * x), 40), 30));
            for (long n = n_lo; n <= n_hi; ++n) {
                // |g^(n)(1,x)| / (n! (n+1) x) = e^{-x^2} |R_n(1,x)| / (n! (n+1))
                Rational v = damp * absr(heat_g_rational(n, 1, x)) / (factorial(n) * (n + 1));
                best = std::max(best, v);
            }
        }
        return best;
    };
    Rational C = 2 * grid_max(0, n_cal);
    // monotonicity check on the extended range; raise C until it dominates
    for (Rational beyond = grid_max(n_cal + 1, 2 * n_cal); beyond > C; beyond = grid_max(n_cal + 1, 2 * n_cal))
        C = 2 * beyond;
    std::lock_guard lock(mutex);
    cache.emplace(x0, C);
    return C;
}

Rational deriv_growth_bound(long n, const Rational& x0) {
    if (n < 0) throw PreconditionError("derivative order must be nonnegative");
    return growth_constant(x0) * (n + 1) * x0;
}

BigInt sph_count(long d, long l) {
    if (d < 2 || l < 0) throw PreconditionError("sph_count needs d >= 2 and l >= 0");
    if (l == 0) return 1;
    Rational v = Rational(2 * l + d - 2) / l * binomial(l + d - 3, l - 1);
    return mp::numerator(v);
}

Ball assoc_legendre_ball(long l, long m, const Ball& x, const Ball& sin_theta, long p) {
    if (m < 0 || m > l) throw PreconditionError("associated Legendre needs 0 <= m <= l");
    long w = p + 4 * l + 8;
    // sum_{k=m}^{l} k!/(k-m)! x^{k-m} C(l,k) C((l+k-1)/2, l), by Horner in x
    std::vector<Rational> c;
    for (long k = m; k <= l; ++k)
        c.push_back(factorial(k) / factorial(k - m) * binomial(l, k) * binomial(Rational(l + k - 1) / 2, l));
    Ball s(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = round(s * x, w) + Ball::from_rational(*it, w);
    Ball v = mul(s, ldexp(Rational(m % 2 ? -1 : 1), l), w);
    for (long i = 0; i < m; ++i) v = round(v * sin_theta, w);
    return round(v, p);
}

CertifiedValue assoc_legendre(long l, long m, const Rational& x, long prec) {
    if (m < 0 || m > l) throw PreconditionError("associated Legendre needs 0 <= m <= l");
    if (absr(x) > 1) throw PreconditionError("associated Legendre needs |x| <= 1");
    return certify(
        [&](long w) {
            Ball s = sqrt(Ball::from_rational(1 - x * x, w + 8), w + 4);
            return assoc_legendre_ball(l, m, Ball::from_rational(x, w + 8), s, w);
        },
        prec);
}

Ball real_sph_harmonic_ball(long l, long m, const Ball& cos_theta, const Ball& sin_theta, const Ball& phi, long p) {
    long am = m < 0 ? -m : m;
    if (am > l) throw PreconditionError("spherical harmonic needs |m| <= l");
    long w = p + 4 * l + 8;
    Rational ratio = Rational(2 * l + 1) * factorial(l - am) / factorial(l + am) / 4;
    if (am != 0) ratio *= 2;
    // sqrt(ratio / pi) carries the sqrt(2) of the real form
    Ball norm = sqrt(div(Ball::from_rational(ratio, w), pi(w), w), w);
    Ball v = round(norm * assoc_legendre_ball(l, am, cos_theta, sin_theta, w), w);
    if (m > 0) v = round(v * cos(mul(phi, Rational(am), w), w), w);
    if (m < 0) v = round(v * sin(mul(phi, Rational(am), w), w), w);
    return round(v, p);
}

CertifiedValue real_sph_harmonic_3d(long l, long m, const PiAffine& theta, const PiAffine& phi, long prec) {
    return certify(
        [&](long w) {
            long wp = w + 8;
            auto [c, s] = cos_sin(theta.value(wp + 4), wp);
            return real_sph_harmonic_ball(l, m, c, s, phi.value(wp + 4), w);
        },
        prec);
}

}  // namespace certheat
