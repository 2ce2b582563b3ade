#pragma once

// Flat key=value configuration and the parameter-sweep engine.
//
// Spec file example:
//   # comment
//   d = 1
//   beta = 0.1:0.9:9      # start:stop:steps, inclusive
//   t_e = 1.5, 2, 2.5     # explicit list
//   seed = 7
//   output = sweep.csv

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "collapse/analysis.hpp"
#include "collapse/montecarlo.hpp"

namespace collapse::sweep {

struct ConfigEntry {
  std::string value;
  int line;
};

/// Parses `key = value` lines; '#' starts a comment; blank lines are
/// skipped. Throws ConfigError on a line without '=' or a repeated key.
std::map<std::string, ConfigEntry> parse_key_values(std::string_view text);

/// `a, b, c` or `start:stop:steps`. Throws ConfigError(line, ...).
std::vector<double> parse_range(std::string_view value, int line);

double parse_double(std::string_view value, int line);
std::int64_t parse_int(std::string_view value, int line);

struct SweepSpec {
  std::vector<double> d;
  std::vector<double> beta;
  std::vector<double> t_e;
  double E_0 = 0.0;
  std::optional<double> t_0;
  std::optional<double> window_start;
  int grid_n = 4096;
  std::string output;
  std::uint64_t seed = 0;
  std::uint64_t mc_trials = 0;  // > 0 adds Monte Carlo rows
  unsigned threads = 0;

  std::size_t row_count() const noexcept { return d.size() * beta.size() * t_e.size(); }
};

/// Throws ConfigError with the offending line for unknown keys, malformed
/// values, empty ranges, or beta outside (0, 1).
SweepSpec parse_sweep_spec(std::string_view text);

struct McRow {
  double d;
  double beta;
  double t_e;
  montecarlo::McStats stats;
};

struct SweepResult {
  std::vector<analysis::FullReport> rows;  // lexicographic in (d, beta, t_e)
  std::vector<McRow> mc;
};

SweepResult run_sweep(const SweepSpec& spec);

std::string sweep_csv(const SweepResult& result);
std::string sweep_mc_csv(const SweepResult& result);

}  // namespace collapse::sweep
