#include "certheat/hardness.hpp"

#include "certheat/heat.hpp"
#include "certheat/laplace.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <thread>

namespace certheat {

bool CountingInstance::accepts(std::uint64_t assignment) const {
    long sum = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (assignment >> i & 1U) sum += weights[i];
    return sum == target;
}

long max_vars() {
    if (const char* env = std::getenv("CERTHEAT_MAX_VARS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 62) return v;
        throw PreconditionError("CERTHEAT_MAX_VARS must be an integer in [1, 62]");
    }
    return 24;
}

void validate(const CountingInstance& inst) {
    if (inst.weights.empty()) throw PreconditionError("counting instance needs at least one weight");
    if (inst.n_vars() > max_vars())
        throw PreconditionError("counting instance has " + std::to_string(inst.n_vars()) + " variables, cap is " +
                                std::to_string(max_vars()));
    if (inst.target <= 0) throw PreconditionError("subset-sum target must be positive");
    for (long w : inst.weights)
        if (w <= 0) throw PreconditionError("subset-sum weights must be positive");
}

long brute_force_count(const CountingInstance& inst, unsigned threads) {
    validate(inst);
    std::uint64_t cells = std::uint64_t{1} << inst.n_vars();
    threads = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(1, cells >> 10)));
    std::vector<long> counts(threads, 0);
    auto work = [&](unsigned id) {
        std::uint64_t lo = cells * id / threads, hi = cells * (id + 1) / threads;
        for (std::uint64_t y = lo; y < hi; ++y) counts[id] += inst.accepts(y);
    };
    std::vector<std::thread> pool;
    for (unsigned id = 1; id < threads; ++id) pool.emplace_back(work, id);
    work(0);
    for (auto& t : pool) t.join();
    return std::accumulate(counts.begin(), counts.end(), 0L);
}

CountingInstance random_instance(long n_vars, std::mt19937_64& rng) {
    if (n_vars < 1 || n_vars > 62) throw PreconditionError("instance size must be in [1, 62]");
    std::uniform_int_distribution<long> weight(1, 3 * n_vars);
    CountingInstance inst;
    for (long i = 0; i < n_vars; ++i) inst.weights.push_back(weight(rng));
    std::uniform_int_distribution<std::uint64_t> subset(1, (std::uint64_t{1} << n_vars) - 1);
    std::uint64_t pick = subset(rng);
    inst.target = 0;
    for (long i = 0; i < n_vars; ++i)
        if (pick >> i & 1U) inst.target += inst.weights[static_cast<std::size_t>(i)];
    return inst;
}

EvaluableFunction counting_integrand(const CountingInstance& inst, std::shared_ptr<std::atomic<long>> verifier_calls) {
    validate(inst);
    const long nv = inst.n_vars();
    const Dyadic height = Dyadic::pow2(1 - nv);
    const std::uint64_t last = (std::uint64_t{1} << nv) - 1;
    auto eval = [inst, nv, height, last, verifier_calls](std::span<const Dyadic> pt, long p) {
        const Dyadic& x = pt[0];
        // leading nv bits of x give the cell, the rest the position inside it
        Dyadic scaled = x.ldexp(nv);
        long shift = scaled.exponent();
        BigInt idx = shift >= 0 ? BigInt(scaled.mantissa() << static_cast<unsigned>(shift))
                                : BigInt(scaled.mantissa() >> static_cast<unsigned>(-shift));
        auto cell = std::min(idx.convert_to<std::uint64_t>(), last);
        Dyadic u = scaled - Dyadic(BigInt(cell), 0);
        if (verifier_calls) verifier_calls->fetch_add(1, std::memory_order_relaxed);
        if (!inst.accepts(cell)) return Dyadic();
        Dyadic tent = std::min(u, Dyadic(1) - u).ldexp(1);
        return (height * tent).round_nearest(p);
    };
    AxisRegularity reg;
    // slope 2^(1-nv) * 2 * 2^nv on each half cell
    reg.lipschitz = Rational(4);
    reg.segments.push_back(Segment{0, 1, nv + 1, Rational(0), {}});
    return EvaluableFunction({Interval{0, 1}}, eval, lipschitz_modulus(4), height.to_rational(), {reg});
}

Rational counting_integral(const CountingInstance& inst) {
    return ldexp(Rational(brute_force_count(inst)), -2 * inst.n_vars());
}

long recover_count(const CertifiedValue& v, const CountingInstance& inst) {
    long nv = inst.n_vars();
    if (v.error_bound() >= ldexp(Rational(1), -2 * nv - 1))
        throw InsufficientPrecision("error 2^-" + std::to_string(v.err_exponent()) +
                                    " does not separate counts; it must be below 2^-" + std::to_string(2 * nv + 1));
    Rational scaled = ldexp(v.value(), 2 * nv) + Rational(1, 2);
    BigInt k = numerator(scaled) / denominator(scaled);
    if (scaled < 0) k -= 1;
    return k.convert_to<long>();
}

std::string to_string(Pipeline p) {
    switch (p) {
    case Pipeline::neumann: return "neumann";
    case Pipeline::disk: return "disk";
    case Pipeline::interval: return "interval";
    }
    return "?";
}

Pipeline parse_pipeline(const std::string& name) {
    if (name == "neumann") return Pipeline::neumann;
    if (name == "disk") return Pipeline::disk;
    if (name == "interval") return Pipeline::interval;
    throw PreconditionError("unknown pipeline '" + name + "' (neumann, disk, interval)");
}

long counting_precision(const CountingInstance& inst) { return 2 * inst.n_vars() + 2; }

PipelineResult run_pipeline(const CountingInstance& inst, Pipeline pipeline, long precision) {
    long n = precision < 0 ? counting_precision(inst) : precision;
    EvaluableFunction f = counting_integrand(inst);
    Ball integral;
    switch (pipeline) {
    case Pipeline::neumann:
        integral = solve_neumann_constant_force(f, 1, n + 2).ball();
        break;
    case Pipeline::disk: {
        // the extension returns linearly from h(1) = 0 to h(0) = 0, so the center value is int h / (2 pi)
        auto s = solve_disk(DiskProblem{hardness_boundary_disk(0, 0, f), 0}, 0, 0, n + 5);
        integral = round(s.value.ball() * pi(n + 12).ldexp(1), n + 8);
        break;
    }
    case Pipeline::interval: {
        Rational t0(1, 4), x0(1, 2), alpha(1);
        auto g = hardness_initial_interval(1, alpha, t0, x0, f);
        auto s = gaussian_reduction(g, alpha, t0, x0, n + 4);
        integral = round(s.value.ball() * sqrt(pi(n + 12), n + 10), n + 8);
        break;
    }
    }
    PipelineResult r{CertifiedValue::from_ball(integral, n, 2), 0, n};
    r.count = recover_count(r.integral, inst);
    return r;
}

std::vector<BlowupRecord> measure_blowup(const std::vector<CountingInstance>& family, Pipeline pipeline, int runs,
                                         unsigned threads) {
    std::vector<BlowupRecord> out;
    for (const auto& inst : family) {
        BlowupRecord rec;
        rec.pipeline = pipeline;
        rec.n_vars = inst.n_vars();
        rec.precision_bits = counting_precision(inst);
        try {
            std::vector<double> times;
            PipelineResult last;
            for (int i = 0; i < std::max(1, runs); ++i) {
                auto start = std::chrono::steady_clock::now();
                last = run_pipeline(inst, pipeline);
                times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
            }
            std::sort(times.begin(), times.end());
            rec.wall_ms = times[times.size() / 2];
            rec.value = last.integral.approx().str();
            rec.count = last.count;
            rec.ok = last.count == brute_force_count(inst, threads);
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void write_csv(std::ostream& out, const std::vector<BlowupRecord>& records) {
    out << "pipeline,n_vars,precision_bits,wall_ms,value,count,ok\n";
    for (const auto& r : records)
        out << to_string(r.pipeline) << ',' << r.n_vars << ',' << r.precision_bits << ',' << r.wall_ms << ','
            << r.value << ',' << r.count << ',' << (r.ok ? "true" : "false") << '\n';
}

}  // namespace certheat
