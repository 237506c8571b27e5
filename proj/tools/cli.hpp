#pragma once

#include "certheat/function.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace certheat::cli {

// bad or incomplete configuration: exit code 2
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode { ok = 0, failure = 1, config_error = 2, precondition_failure = 3 };

// subcommands solve, bench, verify
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// the solve subcommand on config text; returns the result record as JSON text
std::string solve_json(const std::string& config_text, std::optional<long> bits = std::nullopt);

// "3", "-1/7", "0.125"
Rational parse_rational(const std::string& text);
// rational with an optional pi factor: "1/3", "pi", "pi/2", "3/4*pi", "2pi"
PiAffine parse_angle(const std::string& text);
// value with ceil(bits log10 2) + 1 decimals, rounded to nearest
std::string decimal_rendering(const Rational& v, long bits);

struct CheckLine {
    std::string name;
    bool ok = false;
    std::string detail;
};

const std::vector<std::string>& suite_names();
// throws ConfigError on an unknown suite
std::vector<CheckLine> run_suite(const std::string& suite, std::uint64_t seed);

}  // namespace certheat::cli
