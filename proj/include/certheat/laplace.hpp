#pragma once

#include "certheat/certified.hpp"
#include "certheat/function.hpp"
#include "certheat/quadrature.hpp"
#include "certheat/series.hpp"

#include <map>
#include <memory>
#include <mutex>

// Dirichlet problem on the unit disk and the unit ball.
namespace certheat {

struct Solution {
    CertifiedValue value;
    TruncationPlan plan;
};

struct FourierPair {
    CertifiedValue cos_coeff;  // (1/pi) int g(tau) cos(k tau) dtau
    CertifiedValue sin_coeff;  // (1/pi) int g(tau) sin(k tau) dtau
};

FourierPair fourier_coeffs(const EvaluableFunction& g, long k, long prec, const QuadratureOptions& opts = {});

struct DiskProblem {
    EvaluableFunction g;  // on [0, 2pi], periodic
    Rational r0;          // evaluations are allowed for r <= r0 < 1
};

// Truncated Fourier series of the Poisson integral. Coefficients are computed once per precision.
class DiskSolver {
public:
    explicit DiskSolver(DiskProblem problem, QuadratureOptions opts = {});

    TruncationPlan plan(long n) const;
    Solution solve(const Rational& r, const PiAffine& theta, long n);

    // coefficient enclosures (cos, sin) for k = 0..count-1 at precision n
    struct Coefficients {
        std::vector<Ball> cos_part, sin_part;
        TruncationPlan plan;
        QuadraturePlan quadrature;
        bool exact_tail = false;  // every coefficient past the last one is zero
    };
    const Coefficients& coefficients(long n);

private:
    DiskProblem problem_;
    QuadratureOptions opts_;
    std::mutex mutex_;
    std::map<long, std::shared_ptr<const Coefficients>> cache_;
};

Solution solve_disk(const DiskProblem& problem, const Rational& r, const PiAffine& theta, long n);

// Boundary data whose Poisson integral at (r0, theta0) equals the plain mean of the extension of h.
EvaluableFunction hardness_boundary_disk(const Rational& r0, const PiAffine& theta0, const EvaluableFunction& h);
// 2pi-periodic extension of h from [0,1]: h itself, then linear back to h(0) on [1, 2pi]
EvaluableFunction periodic_extension(const EvaluableFunction& h);

struct BallProblem {
    long d = 3;
    EvaluableFunction g;  // on [0,pi] x [0,2pi] (polar, azimuth) for d = 3
    Rational r0;
};

// order K n with ||g||/(d-2)! * sum_{k > Kn} r0^k (k+d-2)!/k! < 2^-(n+1)
TruncationPlan plan_ball_truncation(long d, const Rational& sup_bound, const Rational& r0, long n);

// explicit harmonic expansion for d = 3; needs g.harmonic_degree
Solution solve_ball(const BallProblem& problem, const Rational& r, const PiAffine& theta, const PiAffine& phi, long n);

}  // namespace certheat
