#include "certheat/quadrature.hpp"

#include <algorithm>
#include <sstream>

namespace certheat {

namespace {

Rational absr(const Rational& q) { return q < 0 ? Rational(-q) : q; }

bool is_dyadic(const Rational& q) {
    BigInt d = boost::multiprecision::denominator(q);
    return (d & (d - 1)) == 0;
}

Dyadic exact_dyadic(const Rational& q) {
    BigInt d = boost::multiprecision::denominator(q);
    long e = static_cast<long>(boost::multiprecision::msb(d));
    return {boost::multiprecision::numerator(q), -e};
}

// largest k in [0, cap] with modulus(k) <= limit, or -1
long modulus_reach(const EvaluableFunction& f, long limit, long cap) {
    if (f.modulus(0) > limit) return -1;
    long lo = 0, hi = cap;
    while (lo < hi) {
        long mid = (lo + hi + 1) / 2;
        if (f.modulus(mid) <= limit) lo = mid;
        else hi = mid - 1;
    }
    return lo;
}

struct Bound {
    Rational error;
    std::string rule;
};

std::vector<Segment> segments_of(const EvaluableFunction& f) {
    const auto& reg = f.regularity();
    if (!reg.segments.empty()) return reg.segments;
    return {Segment{f.domain()[0].lo, f.domain()[0].hi}};
}

bool covers_domain(const EvaluableFunction& f, const std::vector<Segment>& segs) {
    return segs.size() == 1 && segs[0].lo == f.domain()[0].lo && segs[0].hi == f.domain()[0].hi;
}

Bound segment_error(const EvaluableFunction& f, const Segment& seg, bool whole, const WeightBounds& w, long j) {
    const auto& reg = f.regularity();
    const Rational S = f.sup_bound();
    const Rational len = (seg.hi - seg.lo).upper();
    const Rational M = Rational(BigInt(1) << j);
    const Rational h = len / M;
    Bound best{2 * S * w.sup * len, "trivial"};
    auto offer = [&](const Rational& e, const char* rule) {
        if (e < best.error) best = {e, rule};
    };
    if (S == 0) return {0, "zero"};
    if (whole && reg.band_limit && w.band && reg.extension != Extension::none) {
        long degree = *reg.band_limit + *w.band;
        bool exact = reg.extension == Extension::periodic ? degree < (1L << std::min(j, 62L))
                                                          : degree < (2L << std::min(j, 61L));
        if (exact) return {0, "band-limited"};
    }
    bool needs_lip = w.d1 != 0;
    bool have_lip = reg.lipschitz.has_value();
    Rational L = have_lip ? *reg.lipschitz : Rational(0);
    if (seg.second_derivative && seg.smooth_cells_log2 >= 0 && j >= seg.smooth_cells_log2 && (have_lip || !needs_lip)) {
        Rational d2 = *seg.second_derivative * w.sup + 2 * L * w.d1 + S * w.d2;
        offer(len * h * h * d2 / 24, "smooth cells");
    }
    if (seg.slope_variation && (have_lip || !needs_lip)) {
        Rational v = *seg.slope_variation * w.sup + 2 * L * len * w.d1 + S * len * w.d2;
        offer(v * h * h / 8, "slope variation");
    }
    if (have_lip) offer(len * (L * w.sup + S * w.d1) * h / 4, "lipschitz");
    long limit = j + 1 - (len > 1 ? ceil_log2(len) : 0);
    long k = modulus_reach(f, limit, 4096);
    if (k >= 0) offer(len * (ldexp(w.sup, -k) + S * w.d1 * h / 2), "modulus");
    return best;
}

struct EvalSettings {
    long value_bits;   // f evaluated to 2^-value_bits
    long node_bits;    // irrational nodes rounded to 2^-node_bits
    Rational shift;    // |f(rounded node) - f(node)| bound
    long weight_bits;
};

EvalSettings settings_for(const EvaluableFunction& f, const std::vector<WeightBounds>& bounds, long target,
                          long extra) {
    Rational wsup = 0;
    for (const auto& b : bounds) wsup = std::max(wsup, b.sup);
    Rational len = f.domain()[0].length_upper();
    long scale = bits_above(len * std::max(wsup, Rational(1)));
    EvalSettings s;
    s.value_bits = target + 4 + scale + extra;
    long shift_goal = target + 4 + scale + extra;
    const auto& reg = f.regularity();
    if (reg.lipschitz) {
        s.node_bits = shift_goal + bits_above(*reg.lipschitz);
        s.shift = ldexp(*reg.lipschitz, -s.node_bits);
    } else {
        s.node_bits = f.modulus(shift_goal);
        s.shift = ldexp(Rational(1), -shift_goal);
    }
    s.weight_bits = s.value_bits + bits_above(f.sup_bound() + 1) + 2;
    return s;
}

}  // namespace

long bits_above(const Rational& q) { return q > 1 ? ceil_log2(q) : 0; }

// (cos k x, sin k x) for k = 0..count-1 by repeated rotation. The radius is the accumulated
// error bound e_{k+1} <= (1 + d) e_k + d + 2^-w with d the width of (cos x, sin x).
std::vector<std::pair<Ball, Ball>> rotation_ladder(const Ball& x, long count, long w) {
    std::vector<std::pair<Ball, Ball>> out;
    out.reserve(static_cast<std::size_t>(count));
    out.emplace_back(Ball(1), Ball(0));
    if (count == 1) return out;
    auto [c1, s1] = cos_sin(x, w);
    Dyadic delta = (c1.rad + s1.rad).round_up_bits(30);
    Dyadic step = Dyadic::pow2(-w);
    Dyadic grow = Dyadic(1) + delta;
    Dyadic c = c1.mid, s = s1.mid, err = delta;
    out.emplace_back(Ball(c, err), Ball(s, err));
    for (long k = 2; k < count; ++k) {
        Dyadic nc = (c * c1.mid - s * s1.mid).round_nearest(w);
        Dyadic ns = (s * c1.mid + c * s1.mid).round_nearest(w);
        c = nc;
        s = ns;
        err = (grow * err + delta + step).round_up_bits(30);
        out.emplace_back(Ball(c, err), Ball(s, err));
    }
    return out;
}

long QuadraturePlan::evaluations() const {
    long total = 0;
    for (const auto& s : segments) total += 1L << s.cells_log2;
    return total;
}

std::string QuadraturePlan::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        os << (i ? "; " : "") << "[" << s.lo.str() << "," << s.hi.str() << "] 2^" << s.cells_log2 << " cells ("
           << s.rule << ")";
    }
    return os.str();
}

QuadraturePlan plan_midpoint(const EvaluableFunction& f, const std::vector<WeightBounds>& weights,
                             const std::vector<Rational>& budgets, const QuadratureOptions& opts) {
    if (f.arity() != 1) throw PreconditionError("midpoint rule needs a one-dimensional function");
    if (weights.size() != budgets.size()) throw PreconditionError("one budget per weight");
    auto segs = segments_of(f);
    bool whole = covers_domain(f, segs);
    QuadraturePlan plan;
    for (const auto& seg : segs) {
        SegmentPlan sp{seg.lo, seg.hi, 0, {}, ""};
        std::vector<Bound> chosen(weights.size());
        for (std::size_t w = 0; w < weights.size(); ++w) {
            Rational share = budgets[w] / static_cast<long long>(segs.size());
            long j = 0;
            Bound b = segment_error(f, seg, whole, weights[w], j);
            while (b.error > share) {
                if (++j > opts.max_log2)
                    throw QuadratureBudgetError("quadrature needs more than 2^" + std::to_string(opts.max_log2) +
                                                " cells on [" + seg.lo.str() + "," + seg.hi.str() + "]");
                b = segment_error(f, seg, whole, weights[w], j);
            }
            sp.cells_log2 = std::max(sp.cells_log2, j);
        }
        std::string rule;
        for (std::size_t w = 0; w < weights.size(); ++w) {
            Bound b = segment_error(f, seg, whole, weights[w], sp.cells_log2);
            sp.error.push_back(b.error);
            if (rule.find(b.rule) == std::string::npos) rule += (rule.empty() ? "" : "+") + b.rule;
        }
        sp.rule = rule;
        plan.segments.push_back(std::move(sp));
    }
    return plan;
}

std::vector<Ball> integrate(const EvaluableFunction& f, const WeightFamily& weights,
                            const std::vector<WeightBounds>& bounds, const std::vector<long>& targets,
                            const QuadratureOptions& opts, QuadraturePlan* plan_out) {
    if (bounds.size() != targets.size()) throw PreconditionError("one target per weight");
    const std::size_t count = bounds.size();
    std::vector<Rational> budgets;
    for (long t : targets) budgets.push_back(ldexp(Rational(1), -t - 1));
    QuadraturePlan plan = plan_midpoint(f, bounds, budgets, opts);
    if (plan_out) *plan_out = plan;
    if (f.is_zero()) return std::vector<Ball>(count, Ball(0));
    long tmax = *std::max_element(targets.begin(), targets.end());

    for (long extra = 0; extra <= 64; extra = extra ? 2 * extra : 8) {
        EvalSettings es = settings_for(f, bounds, tmax, extra);
        Dyadic shift_err = ceil_to(es.shift, es.value_bits + 30);
        Dyadic value_err = Dyadic::pow2(-es.value_bits) + shift_err;
        std::vector<Ball> total(count, Ball(0));
        for (const auto& sp : plan.segments) {
            long j = sp.cells_log2;
            BigInt M = BigInt(1) << j;
            std::vector<Ball> acc(count, Ball(0));
            bool dyadic_nodes = sp.lo.is_rational() && sp.hi.is_rational() && is_dyadic(sp.lo.base) &&
                                is_dyadic((sp.hi.base - sp.lo.base) / Rational(2 * M));
            Ball width;
            if (dyadic_nodes) {
                Dyadic lo = exact_dyadic(sp.lo.base);
                Dyadic half = exact_dyadic((sp.hi.base - sp.lo.base) / Rational(2 * M));
                for (BigInt i = 0; i < M; i += 1) {
                    Dyadic x = lo + half * Dyadic(BigInt(2 * i + 1), 0);
                    Ball F(f(x, es.value_bits), value_err);
                    auto W = weights(Ball(x), es.weight_bits);
                    for (std::size_t w = 0; w < count; ++w) acc[w] += F * W[w];
                    if ((i & 255) == 255)
                        for (auto& a : acc) a = round(a, es.weight_bits + 8 + j);
                }
                width = Ball(half.ldexp(1));
            } else {
                long wq = es.node_bits + 8;
                Ball lo = sp.lo.value(wq);
                Ball len = (sp.hi - sp.lo).value(wq);
                for (BigInt i = 0; i < M; i += 1) {
                    Ball node = round(lo + mul(len, Rational(2 * i + 1, 2 * M), wq), wq);
                    Dyadic x = node.mid.round_nearest(es.node_bits);
                    // rounding to node_bits moves the point by at most 2^-node_bits
                    Ball F(f(x, es.value_bits), value_err);
                    auto W = weights(node, es.weight_bits);
                    for (std::size_t w = 0; w < count; ++w) acc[w] += F * W[w];
                    if ((i & 255) == 255)
                        for (auto& a : acc) a = round(a, es.weight_bits + 8 + j);
                }
                width = div(len, Rational(M), wq);
            }
            for (std::size_t w = 0; w < count; ++w) {
                Ball part = round(acc[w] * width, es.weight_bits + 4);
                total[w] += part.add_error(ceil_to(sp.error[w], targets[w] + 40));
            }
        }
        bool ok = true;
        for (std::size_t w = 0; w < count; ++w) {
            total[w] = round(total[w], targets[w] + 8);
            if (total[w].rad > Dyadic::pow2(-targets[w])) ok = false;
        }
        if (ok) return total;
    }
    throw QuadratureBudgetError("quadrature evaluation error did not settle");
}

Ball integrate(const EvaluableFunction& f, long target, const QuadratureOptions& opts, QuadraturePlan* plan_out) {
    WeightFamily one = [](const Ball&, long) { return std::vector<Ball>{Ball(1)}; };
    WeightBounds b;
    b.band = 0;
    return integrate(f, one, {b}, {target}, opts, plan_out)[0];
}

}  // namespace certheat
