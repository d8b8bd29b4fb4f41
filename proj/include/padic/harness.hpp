#pragma once

#include "padic/rational.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace padic {

struct RunConfig {
    std::int64_t p = 3;
    int precision = 8;     // N
    int truncation = 60;   // K
    int fil_depth = 2;     // M
    int window = 4;        // T
    int k = 3;
    Rational alpha = 3;
    Rational beta = 6;
    int n_max = 3;
    std::uint64_t seed = 1;
    std::vector<std::string> suites;  // empty: all

    // The fixed point and the correspondence need longer windows than the defaults:
    // psi costs a factor p of truncation per level.
    int fixed_point_precision = 20;
    int fixed_point_depth = 8;
    int corr_precision = 30;
    int corr_truncation = 250;
    int corr_depth = 14;
    // dual growth sweep: centers in p^{-dual_window} Z_p, cosets of level <= dual_n_max
    int dual_window = 1;
    int dual_n_max = 1;
};

class ConfigInvalid : public std::invalid_argument {
public:
    explicit ConfigInvalid(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

// "key = value" lines, '#' comments. Unknown keys and bad values are collected, then thrown.
RunConfig parse_config(const std::string& text, const RunConfig& base = {});
// Throws ConfigInvalid naming the violated module constraint.
void validate_config(const RunConfig& cfg);
// Canonical text: every key in a fixed order. parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);
bool operator==(const RunConfig& a, const RunConfig& b);

struct CheckRecord {
    std::string suite;
    std::string name;
    std::string anchor;
    std::string verdict;  // pass, fail, inconclusive
    std::string witness;
    double digits = 0.0;
    double wall_ms = 0.0;
    std::string config_hash;

    bool operator==(const CheckRecord&) const = default;
};

struct Report {
    std::string config_hash;
    std::string config;
    std::vector<CheckRecord> records;
    int passed = 0;
    int failed = 0;
    int inconclusive = 0;

    bool operator==(const Report&) const = default;
};

struct CheckInfo {
    std::string suite;
    std::string name;
    std::string anchor;
    std::string formula;
};

const std::vector<CheckInfo>& check_catalog();
const std::vector<std::string>& suite_names();
std::optional<CheckInfo> find_check(const std::string& name);

// Runs the selected suites in declaration order. Deterministic given the config.
Report run_suite(const RunConfig& cfg);

enum class ReportFormat { json, text };
std::string emit_report(const Report& r, ReportFormat fmt);
Report parse_report(const std::string& json_text);
// The json form with every wall_ms zeroed, for determinism comparisons.
std::string report_fingerprint(const Report& r);

}  // namespace padic
