#pragma once

#include "certheat/certified.hpp"
#include "certheat/function.hpp"

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Subset-sum counting embedded into integrands, and the timing harness around the solvers.
namespace certheat {

struct CountingInstance {
    std::vector<long> weights;  // positive
    long target = 1;            // positive

    long n_vars() const { return static_cast<long>(weights.size()); }
    bool accepts(std::uint64_t assignment) const;
};

class InsufficientPrecision : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// CERTHEAT_MAX_VARS, default 24
long max_vars();

void validate(const CountingInstance& inst);
long brute_force_count(const CountingInstance& inst, unsigned threads = 1);

// weights in [1, 3 n_vars], target the sum of a random nonempty subset
CountingInstance random_instance(long n_vars, std::mt19937_64& rng);

// Cell y of [0,1] (width 2^-n_vars, y read from the leading bits) carries a triangle of height
// 2^(1-n_vars), hence area 4^-n_vars, when the assignment y is accepted. One verifier call per
// evaluation; calls are counted in *verifier_calls when given.
EvaluableFunction counting_integrand(const CountingInstance& inst,
                                     std::shared_ptr<std::atomic<long>> verifier_calls = nullptr);

// count * 4^-n_vars
Rational counting_integral(const CountingInstance& inst);

// nearest integer to v 4^n_vars; needs error(v) < 4^-n_vars / 2
long recover_count(const CertifiedValue& v, const CountingInstance& inst);

enum class Pipeline { neumann, disk, interval };
std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& name);

struct PipelineResult {
    CertifiedValue integral;  // of the counting integrand, within 2^-precision_bits
    long count = 0;
    long precision_bits = 0;
};

// smallest precision for which recover_count is well defined: 2 n_vars + 2
long counting_precision(const CountingInstance& inst);

// neumann: u(1) = int_0^1 f; disk: mean of the boundary data at the center (r0 = 0), times 2 pi;
// interval: Gaussian reduction of the reweighted data at t0 = 1/4, x0 = 1/2 on L = 1, times sqrt(pi)
PipelineResult run_pipeline(const CountingInstance& inst, Pipeline pipeline, long precision = -1);

struct BlowupRecord {
    Pipeline pipeline = Pipeline::neumann;
    long n_vars = 0;
    long precision_bits = 0;
    double wall_ms = 0;  // median over runs
    std::string value;   // certified dyadic literal, empty on failure
    long count = -1;
    bool ok = false;     // recovered count equals brute force
    std::string error;
};

// runs are sequential; `threads` only parallelizes the brute-force check
std::vector<BlowupRecord> measure_blowup(const std::vector<CountingInstance>& family, Pipeline pipeline,
                                         int runs = 1, unsigned threads = 1);

// header pipeline,n_vars,precision_bits,wall_ms,value,count,ok
void write_csv(std::ostream& out, const std::vector<BlowupRecord>& records);

}  // namespace certheat
