#include "cli.hpp"

#include "certheat/hardness.hpp"
#include "certheat/heat.hpp"
#include "certheat/laplace.hpp"
#include "certheat/vocab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <set>

namespace certheat::cli {

namespace {

using json = nlohmann::ordered_json;

void only_keys(const json& j, const std::set<std::string>& keys, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    return j.at(key);
}

Rational as_rational(const json& v, const std::string& what) {
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
    throw ConfigError(what + " must be an integer or a string such as \"1/3\"");
}

Rational rational_at(const json& j, const std::string& key, const std::string& where) {
    return as_rational(need(j, key, where), "'" + key + "' in " + where);
}

std::vector<Rational> rationals_at(const json& j, const std::string& key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_array()) throw ConfigError("'" + key + "' in " + where + " must be a list");
    std::vector<Rational> out;
    for (const auto& e : v) out.push_back(as_rational(e, "entry of '" + key + "'"));
    return out;
}

long integer_at(const json& j, const std::string& key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' in " + where + " must be an integer");
    return v.get<long>();
}

PiAffine angle_at(const json& j, const std::string& key, const std::string& where) {
    const json& v = need(j, key, where);
    if (v.is_number_integer()) return PiAffine(Rational(v.get<long long>()));
    if (v.is_string()) return parse_angle(v.get<std::string>());
    throw ConfigError("'" + key + "' in " + where + " must be an integer or a string such as \"pi/2\"");
}

std::pair<Rational, Rational> domain_at(const json& j, const std::string& where) {
    auto d = rationals_at(j, "domain", where);
    if (d.size() != 2) throw ConfigError("'domain' in " + where + " needs two endpoints");
    return {d[0], d[1]};
}

CountingInstance instance_from(const json& j, const std::string& where) {
    CountingInstance inst;
    const json& w = need(j, "weights", where);
    if (!w.is_array()) throw ConfigError("'weights' in " + where + " must be a list of integers");
    for (const auto& e : w) {
        if (!e.is_number_integer()) throw ConfigError("'weights' in " + where + " must be a list of integers");
        inst.weights.push_back(e.get<long>());
    }
    inst.target = integer_at(j, "target", where);
    return inst;
}

// input-function vocabulary; `length` is the default L for sine data
EvaluableFunction function_from(const json& j, const std::string& where, const std::optional<Rational>& length = {}) {
    if (!j.is_object()) throw ConfigError(where + " must be an object with a 'kind'");
    const json& kind_v = need(j, "kind", where);
    if (!kind_v.is_string()) throw ConfigError("'kind' in " + where + " must be a string");
    std::string kind = kind_v.get<std::string>();
    if (kind == "trig") {
        only_keys(j, {"kind", "cos", "sin"}, where);
        std::vector<Rational> c = j.contains("cos") ? rationals_at(j, "cos", where) : std::vector<Rational>{};
        std::vector<Rational> s = j.contains("sin") ? rationals_at(j, "sin", where) : std::vector<Rational>{};
        return trig_polynomial(c, s);
    }
    if (kind == "sine") {
        only_keys(j, {"kind", "coeffs", "length"}, where);
        Rational L = j.contains("length") ? rational_at(j, "length", where) : length.value_or(Rational(1));
        return sine_series(L, rationals_at(j, "coeffs", where));
    }
    if (kind == "polynomial") {
        only_keys(j, {"kind", "coeffs", "domain"}, where);
        auto [a, b] = domain_at(j, where);
        return polynomial(rationals_at(j, "coeffs", where), a, b);
    }
    if (kind == "constant") {
        only_keys(j, {"kind", "value", "domain"}, where);
        auto [a, b] = domain_at(j, where);
        return constant(rational_at(j, "value", where), {Interval{a, b}});
    }
    if (kind == "piecewise_linear") {
        only_keys(j, {"kind", "knots"}, where);
        const json& k = need(j, "knots", where);
        if (!k.is_array()) throw ConfigError("'knots' in " + where + " must be a list of [x, y] pairs");
        std::vector<std::pair<Rational, Rational>> knots;
        for (const auto& e : k) {
            if (!e.is_array() || e.size() != 2) throw ConfigError("'knots' in " + where + " must hold [x, y] pairs");
            knots.emplace_back(as_rational(e[0], "knot x"), as_rational(e[1], "knot y"));
        }
        return piecewise_linear(knots);
    }
    if (kind == "sphere") {
        only_keys(j, {"kind", "terms"}, where);
        const json& t = need(j, "terms", where);
        if (!t.is_array()) throw ConfigError("'terms' in " + where + " must be a list of [l, m, coeff]");
        std::vector<SphereTerm> terms;
        for (const auto& e : t) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer())
                throw ConfigError("'terms' in " + where + " must hold [l, m, coeff] with integer l, m");
            terms.push_back({e[0].get<long>(), e[1].get<long>(), as_rational(e[2], "term coefficient")});
        }
        return sphere_harmonic_sum(terms);
    }
    if (kind == "counting") {
        only_keys(j, {"kind", "weights", "target"}, where);
        return counting_integrand(instance_from(j, where));
    }
    throw ConfigError("unknown function kind '" + kind + "' in " + where +
                      " (trig, sine, polynomial, constant, piecewise_linear, sphere, counting)");
}

struct Outcome {
    CertifiedValue value;
    std::optional<TruncationPlan> plan;
    json extra = json::object();
};

long bits_from(const json& cfg, std::optional<long> flag) {
    if (flag) return *flag;
    if (cfg.contains("bits")) return integer_at(cfg, "bits", "config");
    throw ConfigError("no precision: give 'bits' in the config or --bits");
}

Outcome solve_config(const json& cfg, std::optional<long> bits_flag) {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    const json& kind_v = need(cfg, "problem", "config");
    if (!kind_v.is_string()) throw ConfigError("'problem' must be a string");
    std::string kind = kind_v.get<std::string>();
    const std::string where = "config";
    auto keys = [&](std::set<std::string> extra) {
        extra.insert({"problem", "bits", "out"});
        only_keys(cfg, extra, where);
    };
    auto R = [&](const std::string& k) { return rational_at(cfg, k, where); };
    if (kind == "disk") {
        keys({"g", "r0", "r", "theta", "hardness"});
        bool hardness = cfg.value("hardness", false);
        long n = bits_from(cfg, bits_flag);
        Rational r0 = R("r0");
        PiAffine theta = angle_at(cfg, "theta", where);
        EvaluableFunction g = function_from(need(cfg, "g", where), "'g'");
        if (hardness) g = hardness_boundary_disk(r0, theta, g);
        auto s = solve_disk(DiskProblem{g, r0}, R("r"), theta, n);
        return {s.value, s.plan};
    }
    if (kind == "ball") {
        keys({"d", "g", "r0", "r", "theta", "phi"});
        long n = bits_from(cfg, bits_flag);
        long d = cfg.contains("d") ? integer_at(cfg, "d", where) : 3;
        BallProblem p{d, function_from(need(cfg, "g", where), "'g'"), R("r0")};
        auto s = solve_ball(p, R("r"), angle_at(cfg, "theta", where), angle_at(cfg, "phi", where), n);
        return {s.value, s.plan};
    }
    if (kind == "interval") {
        keys({"L", "alpha", "t0", "t", "x", "g"});
        long n = bits_from(cfg, bits_flag);
        Rational L = R("L");
        IntervalProblem p{L, R("alpha"), function_from(need(cfg, "g", where), "'g'", L), R("t0")};
        auto s = solve_interval(p, R("t"), R("x"), n);
        return {s.value, s.plan};
    }
    if (kind == "halfline-boundary") {
        keys({"alpha", "x0", "x1", "t", "x", "h"});
        long n = bits_from(cfg, bits_flag);
        HalflineBoundaryProblem p{R("alpha"), function_from(need(cfg, "h", where), "'h'"), R("x0"), R("x1")};
        auto s = solve_halfline_boundary(p, R("t"), R("x"), n);
        return {s.value, s.plan};
    }
    if (kind == "halfline-source") {
        keys({"alpha", "y0", "x0", "x1", "t", "x", "fy", "fs"});
        long n = bits_from(cfg, bits_flag);
        HalflineForceProblem p{R("alpha"), function_from(need(cfg, "fy", where), "'fy'"),
                               function_from(need(cfg, "fs", where), "'fs'"), R("y0"), R("x0"), R("x1")};
        auto s = solve_halfline_force(p, R("t"), R("x"), n);
        return {s.value, s.plan};
    }
    if (kind == "halfline-initial") {
        keys({"alpha", "t", "x", "g"});
        long n = bits_from(cfg, bits_flag);
        HalflineInitialProblem p{R("alpha"), function_from(need(cfg, "g", where), "'g'")};
        auto s = solve_halfline_initial(p, R("t"), R("x"), n);
        return {s.value, s.plan};
    }
    if (kind == "neumann") {
        keys({"t", "f"});
        long n = bits_from(cfg, bits_flag);
        return {solve_neumann_constant_force(function_from(need(cfg, "f", where), "'f'"), R("t"), n), std::nullopt};
    }
    if (kind == "counting") {
        keys({"pipeline", "weights", "target"});
        const json& pv = need(cfg, "pipeline", where);
        if (!pv.is_string()) throw ConfigError("'pipeline' must be a string");
        Pipeline pipeline;
        try {
            pipeline = parse_pipeline(pv.get<std::string>());
        } catch (const PreconditionError& e) {
            throw ConfigError(e.what());
        }
        CountingInstance inst = instance_from(cfg, where);
        long n = bits_flag ? *bits_flag : cfg.contains("bits") ? integer_at(cfg, "bits", where) : -1;
        auto r = run_pipeline(inst, pipeline, n);
        Outcome o{r.integral, std::nullopt};
        o.extra["pipeline"] = to_string(pipeline);
        o.extra["count"] = r.count;
        return o;
    }
    throw ConfigError("unknown problem '" + kind +
                      "' (disk, ball, interval, halfline-boundary, halfline-source, halfline-initial, neumann, counting)");
}

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

json result_record(const json& cfg, const Outcome& o) {
    const CertifiedValue& v = o.value;
    json result;
    result["problem"] = cfg["problem"];
    result["value"] = v.approx().str();
    result["decimal"] = decimal_rendering(v.value(), v.err_exponent());
    result["error_exponent"] = v.err_exponent();
    for (const auto& [k, val] : o.extra.items()) result[k] = val;
    if (o.plan) {
        const auto& p = *o.plan;
        json split = json::array();
        for (const auto& part : p.budget_split) split.push_back({{"label", part.label}, {"exponent", part.exponent}});
        result["plan"] = {{"order", p.order},
                          {"target", p.target},
                          {"budget_split", split},
                          {"justification", p.justification},
                          {"audit", p.audit()}};
    }
    return result;
}

int cmd_solve(const std::string& config_path, std::optional<long> bits, std::optional<std::string> out_path,
              std::ostream& out) {
    json cfg = read_config(config_path);
    if (!out_path && cfg.contains("out")) {
        if (!cfg["out"].is_string()) throw ConfigError("'out' must be a string");
        out_path = cfg["out"].get<std::string>();
    }
    Outcome o = solve_config(cfg, bits);
    json result = result_record(cfg, o);
    out << "value    " << result["value"].get<std::string>() << "\n"
        << "decimal  " << result["decimal"].get<std::string>() << "\n"
        << "error    2^-" << o.value.err_exponent() << "\n";
    for (const auto& [k, val] : o.extra.items()) out << k << std::string(k.size() < 9 ? 9 - k.size() : 1, ' ') << val << "\n";
    if (o.plan) {
        const auto& p = *o.plan;
        out << "order    " << p.order << "\n"
            << "budget  ";
        for (const auto& part : p.budget_split) out << " " << part.label << ": 2^-" << part.exponent << ";";
        out << "\nplan     " << p.justification << "\n"
            << "audit    " << (p.audit() ? "pass" : "FAIL") << "\n";
    }
    if (out_path) write_file(*out_path, result.dump(2) + "\n");
    return ok;
}

struct BenchArgs {
    std::optional<std::string> config, out, pipeline;
    std::optional<long> min_vars, max_vars, runs;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    json cfg = json::object();
    if (a.config) cfg = read_config(*a.config);
    only_keys(cfg, {"pipeline", "n_vars", "instances", "runs", "seed", "out"}, "bench config");
    std::string pipeline_name = a.pipeline.value_or(cfg.value("pipeline", std::string("neumann")));
    Pipeline pipeline;
    try {
        pipeline = parse_pipeline(pipeline_name);
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
    std::uint64_t seed = a.seed.value_or(cfg.contains("seed") ? cfg["seed"].get<std::uint64_t>() : 1);
    long runs = a.runs.value_or(cfg.contains("runs") ? integer_at(cfg, "runs", "bench config") : 1);
    if (runs < 1) throw ConfigError("runs must be at least 1");
    std::vector<CountingInstance> family;
    if (cfg.contains("instances")) {
        if (!cfg["instances"].is_array()) throw ConfigError("'instances' must be a list");
        for (const auto& e : cfg["instances"]) {
            only_keys(e, {"weights", "target"}, "instance");
            family.push_back(instance_from(e, "instance"));
        }
    }
    std::optional<long> lo = a.min_vars, hi = a.max_vars;
    if (cfg.contains("n_vars")) {
        const json& r = cfg["n_vars"];
        if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
            throw ConfigError("'n_vars' must be [lo, hi]");
        if (!lo) lo = r[0].get<long>();
        if (!hi) hi = r[1].get<long>();
    }
    if (lo || hi) {
        if (!lo || !hi || *lo < 1 || *hi < *lo || *hi > 62) throw ConfigError("n_vars range must satisfy 1 <= lo <= hi <= 62");
        std::mt19937_64 rng(seed);
        for (long nv = *lo; nv <= *hi; ++nv) family.push_back(random_instance(nv, rng));
    }
    auto records = measure_blowup(family, pipeline, static_cast<int>(runs), a.threads);
    std::optional<std::string> out_path = a.out;
    if (!out_path && cfg.contains("out")) out_path = cfg["out"].get<std::string>();
    std::ostringstream csv;
    write_csv(csv, records);
    if (out_path) write_file(*out_path, csv.str());
    else out << csv.str();
    return ok;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out) {
    auto lines = run_suite(suite, seed);
    long failed = 0;
    for (const auto& l : lines) {
        out << (l.ok ? "PASS " : "FAIL ") << l.name;
        if (!l.detail.empty()) out << " (" << l.detail << ")";
        out << "\n";
        failed += !l.ok;
    }
    out << lines.size() - static_cast<std::size_t>(failed) << "/" << lines.size() << " checks passed\n";
    return failed ? failure : ok;
}

}  // namespace

namespace {

// BigInt reads a leading 0 as octal
BigInt decimal_integer(std::string digits) {
    bool neg = !digits.empty() && digits[0] == '-';
    if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) digits.erase(0, 1);
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    BigInt v(digits);
    return neg ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
    static const std::regex frac(R"(\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*)");
    static const std::regex dec(R"(\s*([+-]?)(\d*)\.(\d+)\s*)");
    std::smatch m;
    if (std::regex_match(text, m, frac)) {
        BigInt num = decimal_integer(m[1].str());
        BigInt den = m[2].matched ? decimal_integer(m[2].str()) : BigInt(1);
        if (den == 0) throw ConfigError("zero denominator in '" + text + "'");
        return Rational(num, den);
    }
    if (std::regex_match(text, m, dec)) {
        std::string digits = m[2].str() + m[3].str();
        BigInt den = 1;
        for (long i = 0; i < m[3].length(); ++i) den *= 10;
        Rational v(decimal_integer(digits), den);
        return m[1].str() == "-" ? Rational(-v) : v;
    }
    throw ConfigError("cannot read '" + text + "' as an exact rational (use forms like 3, -1/7, 0.125)");
}

PiAffine parse_angle(const std::string& text) {
    static const std::regex with_pi(R"(\s*([+-]?\d*(?:/\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+))?\s*)");
    std::smatch m;
    if (text.find("pi") == std::string::npos) return PiAffine(parse_rational(text));
    if (!std::regex_match(text, m, with_pi)) throw ConfigError("cannot read angle '" + text + "'");
    std::string c = m[1].str();
    Rational coeff = c.empty() || c == "+" ? Rational(1) : c == "-" ? Rational(-1) : parse_rational(c);
    if (m[2].matched) coeff /= Rational(decimal_integer(m[2].str()));
    return PiAffine(0, coeff);
}

std::string decimal_rendering(const Rational& v, long bits) {
    // ceil(bits * log10 2) + 1 digits; 30103/100000 slightly exceeds log10 2
    long digits = static_cast<long>((BigInt(std::max(bits, 0L)) * 30103 + 99999) / 100000) + 1;
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(digits));
    Rational a = v < 0 ? Rational(-v) : v;
    Rational scaled = a * scale + Rational(1, 2);
    BigInt q = numerator(scaled) / denominator(scaled);
    std::string s = q.str();
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    return (v < 0 && q != 0 ? "-" : "") + s;
}

std::string solve_json(const std::string& config_text, std::optional<long> bits) {
    json cfg;
    try {
        cfg = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return result_record(cfg, solve_config(cfg, bits)).dump(2);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certified solvers for the Laplace and heat equations, with counting benchmarks"};
    app.require_subcommand(1);

    std::string config;
    std::optional<long> bits;
    std::optional<std::string> out_path;
    auto* solve = app.add_subcommand("solve", "solve one problem from a JSON config");
    solve->add_option("--config", config, "problem config (JSON)")->required();
    solve->add_option("--bits", bits, "output precision n (error <= 2^-n)");
    solve->add_option("--out", out_path, "write the result record here");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "time the counting pipelines; CSV output");
    bench->add_option("--config", bench_args.config, "bench config (JSON)");
    bench->add_option("--pipeline", bench_args.pipeline, "neumann, disk or interval");
    bench->add_option("--min-vars", bench_args.min_vars, "smallest instance size");
    bench->add_option("--max-vars", bench_args.max_vars, "largest instance size");
    bench->add_option("--runs", bench_args.runs, "runs per instance (median reported)");
    bench->add_option("--seed", bench_args.seed, "instance generator seed");
    bench->add_option("--out", bench_args.out, "CSV path (default stdout)");
    bench->add_option("--threads", bench_args.threads, "threads for the brute-force oracle")->check(CLI::PositiveNumber);

    std::string suite;
    std::uint64_t seed = 1;
    auto* verify = app.add_subcommand("verify", "run module property suites");
    verify->add_option("suite", suite, "kernels, series, laplace, heat, hardness or all")->required();
    verify->add_option("--seed", seed, "seed for randomized points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, x;
        int code = app.exit(e, o, x);
        out << o.str();
        err << x.str();
        return code == 0 ? ok : config_error;
    }
    try {
        if (*solve) return cmd_solve(config, bits, out_path, out);
        if (*bench) return cmd_bench(bench_args, out);
        return cmd_verify(suite, seed, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const PreconditionError& e) {
        err << "precondition failed: " << e.what() << "\n";
        return precondition_failure;
    } catch (const InsufficientPrecision& e) {
        err << "precondition failed: " << e.what() << "\n";
        return precondition_failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
}

}  // namespace certheat::cli
