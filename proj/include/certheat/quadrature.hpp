#pragma once

#include "certheat/function.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Certified composite midpoint rule on one-dimensional functions.
namespace certheat {

class QuadratureBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// bounds on a smooth weight q multiplying the integrand: |q|, |q'|, |q''|
struct WeightBounds {
    Rational sup{1};
    Rational d1{0};
    Rational d2{0};
    std::optional<long> band;  // trigonometric degree, in the integrand's extension units
};

// all weights at one node, each within 2^-p (plus the node ball's own width)
using WeightFamily = std::function<std::vector<Ball>(const Ball& x, long p)>;

struct QuadratureOptions {
    long max_log2 = 24;  // at most 2^max_log2 cells per segment
};

struct SegmentPlan {
    PiAffine lo, hi;
    long cells_log2 = 0;
    std::vector<Rational> error;  // discretization error bound per weight
    std::string rule;             // which bound certified the cell count
};

struct QuadraturePlan {
    std::vector<SegmentPlan> segments;
    long evaluations() const;
    std::string summary() const;
};

// cell counts so that each weight's discretization error stays below budgets[j]
QuadraturePlan plan_midpoint(const EvaluableFunction& f, const std::vector<WeightBounds>& weights,
                             const std::vector<Rational>& budgets, const QuadratureOptions& opts = {});

// int f(x) w_j(x) dx over f's domain, each enclosed with radius <= 2^-targets[j]
std::vector<Ball> integrate(const EvaluableFunction& f, const WeightFamily& weights,
                            const std::vector<WeightBounds>& bounds, const std::vector<long>& targets,
                            const QuadratureOptions& opts = {}, QuadraturePlan* plan_out = nullptr);

Ball integrate(const EvaluableFunction& f, long target, const QuadratureOptions& opts = {},
               QuadraturePlan* plan_out = nullptr);

// smallest e >= 0 with q <= 2^e (0 for q <= 1)
long bits_above(const Rational& q);

// (cos k x, sin k x) for k = 0..count-1 by repeated rotation at working precision w
std::vector<std::pair<Ball, Ball>> rotation_ladder(const Ball& x, long count, long w);

}  // namespace certheat
