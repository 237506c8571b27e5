#include "certheat/series.hpp"

#include <sstream>

namespace certheat {

namespace {

void require_open_unit(const Rational& x) {
    if (!(x > -1 && x < 1)) throw PreconditionError("series needs |x| < 1");
}

Rational horner(const std::vector<Rational>& c, const Rational& x) {
    Rational v = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    return v;
}

}  // namespace

Rational arith_geom_sum(long m, const Rational& x) {
    require_open_unit(x);
    if (m < 0) throw PreconditionError("m must be nonnegative");
    return pow(x, m) * (Rational(m) * (1 - x) + 1) / ((x - 1) * (x - 1));
}

std::vector<Rational> truncation_polynomial(long p, long m) {
    if (p < 0 || m < 0) throw PreconditionError("p and m must be nonnegative");
    if (p == 0) return {Rational(1)};
    // P_{p}(x, m) = ((m+1) Q + x Q') (1 - x) + p x Q   with Q = P_{p-1}(x, m+1)
    std::vector<Rational> q = truncation_polynomial(p - 1, m + 1);
    std::vector<Rational> inner(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) inner[i] = q[i] * (Rational(m + 1) + static_cast<long long>(i));
    std::vector<Rational> out(q.size() + 1, Rational(0));
    for (std::size_t i = 0; i < inner.size(); ++i) {
        out[i] += inner[i];
        out[i + 1] -= inner[i];
        out[i + 1] += q[i] * p;
    }
    while (out.size() > 1 && out.back() == 0) out.pop_back();
    return out;
}

Rational higher_arith_geom(long m, long p, const Rational& x) {
    require_open_unit(x);
    return pow(x, m) * horner(truncation_polynomial(p, m), x) / pow(1 - x, p + 1);
}

Rational pow_upper(const Rational& q, long k, long bits) {
    if (q < 0 || k < 0) throw PreconditionError("pow_upper needs q >= 0 and k >= 0");
    if (k <= 64 || q == 0) return pow(q, k);
    auto up = [bits](const Rational& v) { return ceil_to(v, bits - floor_log2(v)).to_rational(); };
    Rational result = 1, base = up(q);
    for (long e = k; e > 0; e >>= 1) {
        if (e & 1) result = up(result * base);
        if (e > 1) base = up(base * base);
    }
    return result;
}

Rational higher_arith_geom_upper(long m, long p, const Rational& x) {
    require_open_unit(x);
    if (x == 0) return m == 0 ? higher_arith_geom(0, p, x) : Rational(0);
    return pow_upper(x, m) * horner(truncation_polynomial(p, m), x) / pow(1 - x, p + 1);
}

Rational geometric_tail(const Rational& r, long start, const Rational& scale) {
    if (!(r > 0 && r < 1)) throw PreconditionError("geometric tail needs 0 < r < 1");
    return scale * pow(r, start) / (1 - r);
}

long choose_K_disk(const Rational& C, const Rational& r0) {
    if (!(r0 >= 0 && r0 < 1)) throw PreconditionError("r0 must lie in [0,1)");
    if (C <= 0) throw PreconditionError("C must be positive");
    if (r0 == 0) return 1;
    Rational bound = C <= 1 ? rat(1, 2) : 1 / (2 * C);
    long K = 1;
    Rational power = r0;
    while (!(power < bound)) {
        power *= r0;
        ++K;
    }
    return K;
}

bool TruncationPlan::audit() const {
    Rational total = 0;
    for (const auto& part : budget_split) total += ldexp(Rational(1), -part.exponent);
    if (total > ldexp(Rational(1), -target)) return false;
    for (const auto& c : checks)
        if (!c.holds()) return false;
    return true;
}

std::string TruncationPlan::summary() const {
    std::ostringstream os;
    os << "order=" << order << " target=2^-" << target << " split=[";
    for (std::size_t i = 0; i < budget_split.size(); ++i)
        os << (i ? ", " : "") << budget_split[i].label << ":2^-" << budget_split[i].exponent;
    os << "] checks=" << checks.size() << " (" << justification << ")";
    return os.str();
}

}  // namespace certheat
