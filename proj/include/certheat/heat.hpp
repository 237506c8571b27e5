#pragma once

#include "certheat/laplace.hpp"

// Heat equation on a finite interval and on the half-line.
namespace certheat {

struct IntervalProblem {
    Rational length;      // L
    Rational alpha;       // diffusivity
    EvaluableFunction g;  // initial data on [0, L], zero boundary values
    Rational t0;          // evaluations need t >= t0 > 0
};

// (2/L) int_0^L g(x) sin(k pi x / L) dx
CertifiedValue sine_coeff(const IntervalProblem& p, long k, long prec, const QuadratureOptions& opts = {});

// Truncated sine series; coefficients are computed once per precision.
class IntervalSolver {
public:
    explicit IntervalSolver(IntervalProblem problem, QuadratureOptions opts = {});

    TruncationPlan plan(long n) const;
    Solution solve(const Rational& t, const Rational& x, long n);

    struct Coefficients {
        std::vector<Ball> sine;  // index k-1 holds the k-th coefficient
        TruncationPlan plan;
        QuadraturePlan quadrature;
        bool exact_tail = false;
    };
    const Coefficients& coefficients(long n);

private:
    IntervalProblem problem_;
    QuadratureOptions opts_;
    std::mutex mutex_;
    std::map<long, std::shared_ptr<const Coefficients>> cache_;
};

Solution solve_interval(const IntervalProblem& problem, const Rational& t, const Rational& x, long n);

// g*(y) = (1/L) h(y/L) exp((y - x0)^2 / (4 pi alpha t0)) on [0, L], for h on [0, 1] with a Lipschitz bound.
// Its Gaussian reduction at (t0, x0) is (1/sqrt(4 pi t0)) int_0^1 h.
EvaluableFunction hardness_initial_interval(const Rational& length, const Rational& alpha, const Rational& t0,
                                            const Rational& x0, const EvaluableFunction& h);

// (1/sqrt(4 pi t)) int g(y) exp(-(y - x)^2 / (4 pi alpha t)) dy over g's domain
Solution gaussian_reduction(const EvaluableFunction& g, const Rational& alpha, const Rational& t, const Rational& x,
                            long n, const QuadratureOptions& opts = {});

// u_t = alpha u_xx on x > 0, u(0,x) = 0, u(t,0) = h(t)
struct HalflineBoundaryProblem {
    Rational alpha;
    EvaluableFunction h;  // on [0, 2], h(0) = 0
    Rational x0, x1;      // evaluations need x0 <= x <= x1
};

// zero data, source f(y, s) = fy(y) fs(s) supported in [0, y0] x [0, 2]
struct HalflineForceProblem {
    Rational alpha;
    EvaluableFunction fy;  // on [0, y0]
    EvaluableFunction fs;  // on [0, 2]
    Rational y0;
    Rational x0, x1;  // y0 < x0 <= x <= x1
};

// zero boundary values, initial data g supported in [a, b] (g's domain), evaluated away from [a, b]
struct HalflineInitialProblem {
    Rational alpha;
    EvaluableFunction g;
};

// Taylor scheme around t = 1 with time window 1/N; order() is the Taylor degree T
TruncationPlan plan_halfline_boundary(const HalflineBoundaryProblem& p, const Rational& x, long n);
TruncationPlan plan_halfline_force(const HalflineForceProblem& p, const Rational& x, long n);
TruncationPlan plan_halfline_initial(const HalflineInitialProblem& p, const Rational& t, const Rational& x, long n);

Solution solve_halfline_boundary(const HalflineBoundaryProblem& p, const Rational& t, const Rational& x, long n,
                                 const QuadratureOptions& opts = {});
Solution solve_halfline_force(const HalflineForceProblem& p, const Rational& t, const Rational& x, long n,
                              const QuadratureOptions& opts = {});
Solution solve_halfline_initial(const HalflineInitialProblem& p, const Rational& t, const Rational& x, long n,
                                const QuadratureOptions& opts = {});

// Neumann problem with zero data and a time-only source: u(t, x) = int_0^t f(s) ds
CertifiedValue solve_neumann_constant_force(const EvaluableFunction& f, const Rational& t, long n,
                                            const QuadratureOptions& opts = {});

}  // namespace certheat
