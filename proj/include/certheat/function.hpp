#pragma once

#include "certheat/ball.hpp"
#include "certheat/dyadic.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace certheat {

// base + pi_coeff * pi; covers every domain endpoint used here (0, 1, L, pi, 2pi)
struct PiAffine {
    Rational base{0};
    Rational pi_coeff{0};

    PiAffine() = default;
    PiAffine(Rational b, Rational p = 0) : base(std::move(b)), pi_coeff(std::move(p)) {}  // NOLINT
    PiAffine(long long b) : base(b) {}                                                    // NOLINT

    bool is_rational() const { return pi_coeff == 0; }
    Ball value(long p) const;
    Rational upper() const;
    Rational lower() const;
    std::string str() const;

    friend PiAffine operator-(const PiAffine& a, const PiAffine& b) {
        return {a.base - b.base, a.pi_coeff - b.pi_coeff};
    }
    friend bool operator==(const PiAffine&, const PiAffine&) = default;
};

// rational bounds 333/106 < pi < 355/113
Rational pi_upper();
Rational pi_lower();

struct Interval {
    PiAffine lo, hi;
    Rational length_upper() const { return (hi - lo).upper(); }
    Rational length_lower() const { return (hi - lo).lower(); }
};

// Smoothness of one piece of an axis. Inside each of the 2^smooth_cells_log2 equal cells the
// function is C^2 with |f''| <= second_derivative; slope_variation bounds TV(f') over the piece.
struct Segment {
    PiAffine lo, hi;
    long smooth_cells_log2 = -1;
    std::optional<Rational> second_derivative;
    std::optional<Rational> slope_variation;
};

enum class Extension { none, periodic, odd };

struct AxisRegularity {
    std::optional<Rational> lipschitz;
    std::vector<Segment> segments;  // empty means one segment over the whole axis, nothing known
    // trigonometric degree: periodic -> degree in 2*pi*x/period, odd -> sine degree in pi*x/L
    std::optional<long> band_limit;
    Extension extension = Extension::none;
};

// A pointwise evaluator on a box with a declared modulus and sup bound.
// eval(point, p) is within 2^-p of f(point).
class EvaluableFunction {
public:
    using Evaluator = std::function<Dyadic(std::span<const Dyadic>, long)>;
    using Modulus = std::function<long(long)>;

    EvaluableFunction() = default;
    EvaluableFunction(std::vector<Interval> domain, Evaluator eval, Modulus modulus, Rational sup_bound,
                      std::vector<AxisRegularity> regularity = {});

    static EvaluableFunction zero(std::vector<Interval> domain);

    std::size_t arity() const { return domain_.size(); }
    const std::vector<Interval>& domain() const { return domain_; }
    const Rational& sup_bound() const { return sup_; }
    long modulus(long k) const { return modulus_(k); }
    const AxisRegularity& regularity(std::size_t axis = 0) const { return reg_.at(axis); }
    AxisRegularity& regularity(std::size_t axis = 0) { return reg_.at(axis); }
    bool is_zero() const { return zero_; }

    // spherical polynomial degree for data on [0,pi]x[0,2pi], when known
    std::optional<long> harmonic_degree;

    Dyadic operator()(std::span<const Dyadic> point, long p) const;
    Dyadic operator()(const Dyadic& x, long p) const { return (*this)(std::span<const Dyadic>(&x, 1), p); }
    Ball ball(std::span<const Dyadic> point, long p) const { return {(*this)(point, p), Dyadic::pow2(-p)}; }
    Ball ball(const Dyadic& x, long p) const { return {(*this)(x, p), Dyadic::pow2(-p)}; }

    // the textual contract: a dyadic decimal within 2^-n of f(value(point)), printed with pcs = n
    DyadicDecimal eval(const DyadicDecimal& point, long n) const;

private:
    std::vector<Interval> domain_;
    Evaluator eval_;
    Modulus modulus_;
    Rational sup_{0};
    std::vector<AxisRegularity> reg_;
    bool zero_ = false;
};

// modulus of a Lipschitz function: |x-y| <= 2^-(k + ceil log2 L) gives 2^-k
EvaluableFunction::Modulus lipschitz_modulus(const Rational& lipschitz);

// f on [lo, hi]; segments are clipped and band information is dropped
EvaluableFunction restrict_to(const EvaluableFunction& f, const Rational& lo, const Rational& hi);

// Evaluate a ball-valued expression until it settles within 2^-p.
Dyadic settle_with(const std::function<Ball(long)>& compute, long p);

}  // namespace certheat
