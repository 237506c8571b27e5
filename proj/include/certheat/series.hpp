#pragma once

#include "certheat/dyadic.hpp"

#include <string>
#include <vector>

namespace certheat {

// sum_{k>=m} (k+1) x^k in closed form, |x| < 1
Rational arith_geom_sum(long m, const Rational& x);

// Coefficients in x of the polynomial P with sum_{k>=m} x^k (k+p)!/k! = x^m P(x) / (1-x)^(p+1),
// built by differentiating x^(p+m)/(1-x) one order at a time.
std::vector<Rational> truncation_polynomial(long p, long m);

// sum_{k>=m} x^k (k+p)!/k!, |x| < 1
Rational higher_arith_geom(long m, long p, const Rational& x);

// upper bound on q^k (q >= 0), exact for k <= 64, otherwise squared with upward rounding to `bits` bits
Rational pow_upper(const Rational& q, long k, long bits = 64);
// rational upper bound on higher_arith_geom for long tails
Rational higher_arith_geom_upper(long m, long p, const Rational& x);

// scale * r^start / (1 - r), 0 < r < 1
Rational geometric_tail(const Rational& r, long start, const Rational& scale);

// smallest K with r0^K < 1/2 (C <= 1) or r0^K < 1/(2C) (C > 1); 1 when r0 = 0
long choose_K_disk(const Rational& C, const Rational& r0);

// One exact inequality lhs < rhs (or <=) backing a truncation choice.
struct BudgetCheck {
    std::string label;
    Rational lhs;
    Rational rhs;
    bool strict = false;
    bool holds() const { return strict ? lhs < rhs : lhs <= rhs; }
};

struct BudgetPart {
    std::string label;
    long exponent;  // this part is allotted 2^-exponent
};

struct TruncationPlan {
    long order = 0;
    long target = 0;  // total error allowed is 2^-target
    std::vector<BudgetPart> budget_split;
    std::vector<BudgetCheck> checks;
    std::string justification;

    // sum of the budget parts <= 2^-target and every recorded inequality holds, all in exact rationals
    bool audit() const;
    std::string summary() const;
};

}  // namespace certheat
