#include "collapse/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <tuple>

#include "collapse/errors.hpp"
#include "collapse/format.hpp"
#include "collapse/parallel.hpp"

namespace collapse::sweep {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::map<std::string, ConfigEntry> parse_key_values(std::string_view text) {
  std::map<std::string, ConfigEntry> entries;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) throw ConfigError(line_no, "empty key");
      if (entries.contains(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
      entries.emplace(key, ConfigEntry{std::string(trim(line.substr(eq + 1))), line_no});
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return entries;
}

double parse_double(std::string_view value, int line) {
  value = trim(value);
  double out = 0.0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (value.empty() || ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw ConfigError(line, "not a finite number: '" + std::string(value) + "'");
  }
  return out;
}

std::int64_t parse_int(std::string_view value, int line) {
  value = trim(value);
  std::int64_t out = 0;
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), last, out);
  if (value.empty() || ec != std::errc() || ptr != last) {
    throw ConfigError(line, "not an integer: '" + std::string(value) + "'");
  }
  return out;
}

std::vector<double> parse_range(std::string_view value, int line) {
  value = trim(value);
  if (value.empty()) throw ConfigError(line, "empty range");
  if (value.find(':') != std::string_view::npos) {
    const auto parts = split(value, ':');
    if (parts.size() != 3) throw ConfigError(line, "range must be start:stop:steps");
    const double lo = parse_double(parts[0], line);
    const double hi = parse_double(parts[1], line);
    const auto steps = parse_int(parts[2], line);
    if (steps < 1) throw ConfigError(line, "range needs steps >= 1");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(steps));
    for (std::int64_t k = 0; k < steps; ++k) {
      v.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1));
    }
    return v;
  }
  std::vector<double> v;
  for (const auto part : split(value, ',')) v.push_back(parse_double(part, line));
  return v;
}

SweepSpec parse_sweep_spec(std::string_view text) {
  const auto entries = parse_key_values(text);
  static const std::set<std::string> known = {"d",      "beta",    "t_e",       "E0",
                                              "t0",     "window_start", "grid_n", "output",
                                              "seed",   "mc_trials", "threads"};
  for (const auto& [key, entry] : entries) {
    if (!known.contains(key)) throw ConfigError(entry.line, "unknown key '" + key + "'");
  }
  SweepSpec spec;
  const auto need_range = [&](const char* key) {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError(0, std::string("missing required key '") + key + "'");
    return std::make_pair(sorted_unique(parse_range(it->second.value, it->second.line)), it->second.line);
  };
  int line = 0;
  std::tie(spec.d, line) = need_range("d");
  for (const double d : spec.d) {
    if (!(d > 0.0)) throw ConfigError(line, "d values must be > 0");
  }
  std::tie(spec.beta, line) = need_range("beta");
  for (const double b : spec.beta) {
    if (!(b > 0.0 && b < 1.0)) throw ConfigError(line, "beta values must lie in (0, 1)");
  }
  std::tie(spec.t_e, line) = need_range("t_e");
  for (const double t : spec.t_e) {
    if (!(t >= 0.0)) throw ConfigError(line, "t_e values must be >= 0");
  }
  if (const auto it = entries.find("E0"); it != entries.end()) {
    spec.E_0 = parse_double(it->second.value, it->second.line);
  }
  if (const auto it = entries.find("t0"); it != entries.end()) {
    spec.t_0 = parse_double(it->second.value, it->second.line);
  }
  if (const auto it = entries.find("window_start"); it != entries.end()) {
    spec.window_start = parse_double(it->second.value, it->second.line);
  }
  if (const auto it = entries.find("grid_n"); it != entries.end()) {
    const auto n = parse_int(it->second.value, it->second.line);
    if (n < 16 || n > (1 << 24) || (n & (n - 1)) != 0) {
      throw ConfigError(it->second.line, "grid_n must be a power of two in [16, 2^24]");
    }
    spec.grid_n = static_cast<int>(n);
  }
  if (const auto it = entries.find("output"); it != entries.end()) spec.output = it->second.value;
  if (const auto it = entries.find("seed"); it != entries.end()) {
    const auto s = parse_int(it->second.value, it->second.line);
    if (s < 0) throw ConfigError(it->second.line, "seed must be >= 0");
    spec.seed = static_cast<std::uint64_t>(s);
  }
  if (const auto it = entries.find("mc_trials"); it != entries.end()) {
    const auto n = parse_int(it->second.value, it->second.line);
    if (n < 0) throw ConfigError(it->second.line, "mc_trials must be >= 0");
    spec.mc_trials = static_cast<std::uint64_t>(n);
  }
  if (const auto it = entries.find("threads"); it != entries.end()) {
    const auto n = parse_int(it->second.value, it->second.line);
    if (n < 0 || n > 1024) throw ConfigError(it->second.line, "threads must be in [0, 1024]");
    spec.threads = static_cast<unsigned>(n);
  }
  return spec;
}

SweepResult run_sweep(const SweepSpec& spec) {
  struct Point {
    double d, beta, t_e;
  };
  std::vector<Point> points;
  points.reserve(spec.row_count());
  for (const double d : spec.d) {
    for (const double b : spec.beta) {
      for (const double t : spec.t_e) points.push_back({d, b, t});
    }
  }

  const auto config_for = [&](const Point& pt) {
    auto cfg = kinematics::ExperimentConfig::make(pt.d, pt.beta, pt.t_e);
    cfg.grid_n = spec.grid_n;
    cfg.window_start = spec.window_start;
    return cfg;
  };

  SweepResult result;
  result.rows.resize(points.size());
  parallel_for(points.size(), spec.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      analysis::ReportOptions opts;
      opts.t_0 = spec.t_0;
      opts.E_0 = spec.E_0;
      result.rows[i] = analysis::full_report(config_for(points[i]), opts);
    }
  });

  if (spec.mc_trials > 0) {
    // Trials inside run_trials are already parallel; rows run in sequence.
    for (const auto& pt : points) {
      const auto cfg = config_for(pt);
      const auto grid = quantum::TimeGrid::aligned(cfg.d, cfg.effective_window_start(), cfg.grid_n);
      quantum::ProjectionParams p;
      p.beta = pt.beta;
      p.t_0 = std::clamp(spec.t_0.value_or(analysis::default_t0(cfg)), grid.center(0), grid.center(grid.n() - 1));
      p.E_0 = spec.E_0;
      montecarlo::RunOptions opts;
      opts.threads = spec.threads;
      result.mc.push_back({pt.d, pt.beta, pt.t_e,
                           montecarlo::run_trials(cfg, p, spec.mc_trials, spec.seed, opts)});
    }
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = analysis::report_csv_header() + '\n';
  for (const auto& r : result.rows) out += analysis::report_csv_row(r) + '\n';
  return out;
}

std::string sweep_mc_csv(const SweepResult& result) {
  std::string out = "d,beta,t_e," + montecarlo::stats_csv_header() + '\n';
  for (const auto& r : result.mc) {
    out += num(r.d) + ',' + num(r.beta) + ',' + num(r.t_e) + ',' +
           montecarlo::stats_csv_row(r.stats) + '\n';
  }
  return out;
}

}  // namespace collapse::sweep
