#pragma once

#include "certheat/function.hpp"

#include <utility>
#include <vector>

// Builtin input functions with their declared regularity.
namespace certheat {

EvaluableFunction constant(const Rational& c, std::vector<Interval> domain);

// sum_k cos_coeffs[k] cos(k tau) + sin_coeffs[k] sin(k tau) on [0, 2pi]; sin_coeffs[0] is ignored
EvaluableFunction trig_polynomial(std::vector<Rational> cos_coeffs, std::vector<Rational> sin_coeffs);

// sum_{k>=1} coeffs[k-1] sin(k pi x / L) on [0, L]
EvaluableFunction sine_series(const Rational& length, std::vector<Rational> coeffs);

// sum_i coeffs[i] x^i on [a, b]
EvaluableFunction polynomial(std::vector<Rational> coeffs, const Rational& a, const Rational& b);

// linear interpolation through (x_i, y_i), x strictly increasing
EvaluableFunction piecewise_linear(std::vector<std::pair<Rational, Rational>> knots);

// f(y, s) = fy(y) * fs(s)
EvaluableFunction separable(EvaluableFunction fy, EvaluableFunction fs);

struct SphereTerm {
    long l = 0, m = 0;
    Rational coeff;
};

// sum of coeff * Y_lm (real orthonormal harmonics) on [0,pi] x [0,2pi]
EvaluableFunction sphere_harmonic_sum(std::vector<SphereTerm> terms);

AxisRegularity scaled(const AxisRegularity& r, const Rational& factor);

}  // namespace certheat
