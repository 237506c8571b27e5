#pragma once

#include "certheat/certified.hpp"
#include "certheat/function.hpp"

#include <vector>

namespace certheat {

// rational bounds on Euler's number
Rational e_upper();
Rational e_lower();

// (1 - r^2) / (1 - 2 r cos(theta - tau) + r^2), 0 <= r < 1
Ball poisson_kernel_ball(const Rational& r, const Ball& angle_diff, long p);
CertifiedValue poisson_kernel_2d(const Rational& r, const PiAffine& theta, const PiAffine& tau, long prec);

// Time derivatives of g(t,x) = x t^(-3/2) exp(-x^2/t).
// g^(n)(t,x) = x sqrt(t) exp(-x^2/t) * R_n(t,x) with R_n an exact rational.
Rational heat_g_rational(long n, const Rational& t, const Rational& x);
Ball heat_g_ball(long n, const Rational& t, const Rational& x, long p);
CertifiedValue heat_g(long n, const Rational& t, const Rational& x, long prec);

// n-th t-derivative of t^(-1/2) exp(-x^2/t), via (t g^(n) + n g^(n-1)) / x
Ball heat_g_tilde_ball(long n, const Rational& t, const Rational& x, long p);
CertifiedValue heat_g_tilde(long n, const Rational& t, const Rational& x, long prec);
// the variant (t g^(n) + g^(n-1)) / x, kept only so tests can record how it compares
Ball heat_g_tilde_printed_ball(long n, const Rational& t, const Rational& x, long p);

// Taylor data around t = 1. q_k = g^(k)(1,xi) / (k! xi e^{-xi^2}) from the exact recurrence
// (k+1) q_{k+1} = (xi^2 - 2k - 3/2) q_k - (k + 1/2) q_{k-1}, q_0 = 1, q_1 = xi^2 - 3/2.
std::vector<Ball> heat_taylor_q(const Rational& xi_sq, long count, long p);

// Certified Cauchy-estimate bounds on the Taylor coefficients at t = 1, valid for every k:
// |g^(k)(1,x)|/k! <= e x (k+1)^(3/2) and |d^k/dt^k t^(-1/2)e^(-z^2/t)|/k! <= e (k+1)^(1/2).
Rational heat_coeff_bound(long k, const Rational& x);

// C(x0) (n+1) x0 with C calibrated on a grid (not a proof; see growth_constant)
Rational deriv_growth_bound(long n, const Rational& x0);
Rational growth_constant(const Rational& x0);

// dimension of degree-l spherical harmonics on S^{d-1}
BigInt sph_count(long d, long l);

// associated Legendre function with the (-1)^m phase, 0 <= m <= l, |x| <= 1
CertifiedValue assoc_legendre(long l, long m, const Rational& x, long prec);
// polynomial part times sin_theta^m, with x = cos(theta) and sin_theta = sqrt(1 - x^2)
Ball assoc_legendre_ball(long l, long m, const Ball& x, const Ball& sin_theta, long p);

// real orthonormal spherical harmonic on S^2
CertifiedValue real_sph_harmonic_3d(long l, long m, const PiAffine& theta, const PiAffine& phi, long prec);
Ball real_sph_harmonic_ball(long l, long m, const Ball& cos_theta, const Ball& sin_theta, const Ball& phi, long p);

}  // namespace certheat
