// Command-line front end: emission windows, ordering reports, parameter
// sweeps, state dumps, Monte Carlo runs and worldline diagram data.
//
// Exit codes: 0 success, 2 domain/config error, 3 self-check failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "collapse/acceptance.hpp"
#include "collapse/analysis.hpp"
#include "collapse/errors.hpp"
#include "collapse/format.hpp"
#include "collapse/kinematics.hpp"
#include "collapse/montecarlo.hpp"
#include "collapse/quantum.hpp"
#include "collapse/sweep.hpp"

namespace {

namespace kin = collapse::kinematics;
namespace qm = collapse::quantum;
using collapse::num;

constexpr int kExitConfig = 2;
constexpr int kExitSelfcheck = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw collapse::ConfigError(0, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw collapse::ConfigError(0, "cannot write '" + path + "'");
  out << text;
}

// Values shared by the subcommands. A key=value config file fills whatever
// the command line left unset.
struct Params {
  std::optional<double> d, beta, te, t0, tmax, tol, window_start, epsilon, proj_beta;
  double E0 = 0.0;
  int grid_n = 4096;
  std::uint64_t n = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

class ConfigOverlay {
 public:
  void load(const std::string& path) {
    if (!path.empty()) entries_ = collapse::sweep::parse_key_values(read_file(path));
  }

  template <typename T>
  void fill(const CLI::Option* opt, const std::string& key, T& target) const {
    if (opt != nullptr && opt->count() > 0) return;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return;
    const auto& e = it->second;
    if constexpr (std::is_same_v<T, std::optional<double>> || std::is_same_v<T, double>) {
      target = collapse::sweep::parse_double(e.value, e.line);
    } else {
      const auto v = collapse::sweep::parse_int(e.value, e.line);
      if (v < 0) throw collapse::ConfigError(e.line, key + " must be >= 0");
      target = static_cast<T>(v);
    }
  }

 private:
  std::map<std::string, collapse::sweep::ConfigEntry> entries_;
};

double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw collapse::ConfigError(0, std::string("missing required value --") + flag);
  return *v;
}

kin::ExperimentConfig make_config(const Params& p) {
  auto cfg = kin::ExperimentConfig::make(require(p.d, "d"), require(p.beta, "beta"), require(p.te, "te"));
  cfg.grid_n = p.grid_n;
  cfg.window_start = p.window_start;
  cfg.tol = p.tol;
  return cfg;
}

int run_window(const Params& p) {
  const auto w = kin::emission_window(require(p.d, "d"), kin::Velocity(require(p.beta, "beta")));
  std::cout << "t_e_min=" << num(w.t_e_min) << " t_e_max=" << num(w.t_e_max) << " width=" << num(w.width) << '\n';
  return 0;
}

int run_report(const Params& p, bool csv) {
  collapse::analysis::ReportOptions opts;
  opts.t_0 = p.t0;
  opts.E_0 = p.E0;
  opts.projection_beta = p.proj_beta;
  const auto r = collapse::analysis::full_report(make_config(p), opts);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (csv) {
    std::cout << collapse::analysis::report_csv_header() << '\n' << collapse::analysis::report_csv_row(r) << '\n';
    return 0;
  }
  std::cout << "regime=" << kin::to_string(r.ordering.regime) << '\n'
            << "in_window=" << (r.in_window ? "true" : "false") << '\n'
            << "dt_lab=" << num(r.ordering.delta_t_lab) << '\n'
            << "dt_bob_exact=" << num(r.ordering.delta_t_bob_exact) << '\n'
            << "dt_bob_paper=" << num(r.ordering.delta_t_bob_paper) << '\n'
            << "sigma_t=" << num(r.resolution.sigma_t) << '\n'
            << "sigma_t_prime=" << num(r.resolution.sigma_t_prime) << '\n'
            << "upper=" << num(r.resolution.upper) << '\n'
            << "lower=" << num(r.resolution.lower) << '\n'
            << "identity_residual=" << num(r.resolution.identity_residual) << '\n'
            << "sigma_t_paper=" << num(r.sigma_t_paper) << '\n'
            << "var_tA_numeric=" << num(r.var_tA_numeric) << '\n'
            << "norm_raw=" << num(r.norm_raw) << '\n'
            << "verdict=" << r.verdict() << '\n';
  return 0;
}

int run_sweep(const std::string& spec_path, const std::string& output_override) {
  auto spec = collapse::sweep::parse_sweep_spec(read_file(spec_path));
  if (!output_override.empty()) spec.output = output_override;
  const auto result = collapse::sweep::run_sweep(spec);
  write_output(spec.output, collapse::sweep::sweep_csv(result));
  if (spec.mc_trials > 0) {
    const std::string mc_path = spec.output.empty() || spec.output == "-" ? "-" : spec.output + ".mc.csv";
    write_output(mc_path, collapse::sweep::sweep_mc_csv(result));
  }
  return 0;
}

qm::ProjectionParams projection(const Params& p, double beta, bool gaussian) {
  qm::ProjectionParams proj;
  proj.beta = beta;
  proj.t_0 = require(p.t0, "t0");
  proj.E_0 = p.E0;
  proj.epsilon = p.epsilon;
  proj.mode = gaussian ? qm::DeltaMode::Gaussian : qm::DeltaMode::Kronecker;
  return proj;
}

int run_state(const Params& p, const std::string& what, const std::string& out, bool gaussian) {
  const double d = require(p.d, "d");
  const double t_w = p.window_start.value_or(d);
  const auto grid = qm::TimeGrid::aligned(d, t_w, p.grid_n);
  auto state = qm::constrained_initial_state(d, grid, t_w);
  if (p.beta) state = qm::project_bob(state, projection(p, *p.beta, gaussian));
  for (const auto& w : state.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "norm_raw=" << num(state.norm_raw()) << " var_tA=" << num(qm::time_marginal_variance(state)) << '\n';
  write_output(out, what == "profiles" ? qm::profiles_csv(state) : qm::marginals_csv(state));
  return 0;
}

int run_mc(const Params& p, const std::string& dump, bool gaussian) {
  const auto cfg = make_config(p);
  const auto proj = projection(p, p.proj_beta.value_or(cfg.beta()), gaussian);
  std::vector<collapse::montecarlo::TrialOutcome> outcomes;
  collapse::montecarlo::RunOptions opts;
  opts.threads = p.threads;
  if (!dump.empty()) opts.outcomes = &outcomes;
  const auto stats = collapse::montecarlo::run_trials(cfg, proj, p.n, p.seed, opts);
  std::cout << collapse::montecarlo::stats_csv_header() << '\n' << collapse::montecarlo::stats_csv_row(stats) << '\n';
  if (!dump.empty()) write_output(dump, collapse::montecarlo::outcomes_csv(outcomes));
  return 0;
}

int run_diagram(const Params& p, const std::string& out) {
  const auto points = kin::worldline_diagram(make_config(p), require(p.tmax, "tmax"));
  write_output(out, kin::diagram_csv(points));
  return 0;
}

int run_selfcheck() {
  bool ok = true;
  for (const auto& r : collapse::acceptance::run_all()) {
    std::cout << collapse::acceptance::format_line(r) << '\n';
    ok = ok && r.passed;
  }
  std::cout << (ok ? "selfcheck: all criteria passed" : "selfcheck: FAILED") << '\n';
  return ok ? 0 : kExitSelfcheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-dependent measurement ordering of a time-energy entangled biphoton"};
  app.require_subcommand(0, 1);

  Params p;
  std::string config_path;
  bool selfcheck = false;
  app.add_option("--config", config_path, "flat key=value file; flags override its values");
  app.add_flag("--selfcheck", selfcheck, "run the acceptance criteria; exit 3 on failure");

  std::map<const CLI::App*, std::map<std::string, CLI::Option*>> opts;
  const auto add_common = [&](CLI::App* sub, std::initializer_list<const char*> keys) {
    for (const std::string key : keys) {
      CLI::Option* o = nullptr;
      if (key == "d") o = sub->add_option("--d", p.d, "Alice's distance from the source");
      if (key == "beta") o = sub->add_option("--beta", p.beta, "Bob's speed (fraction of c)");
      if (key == "te") o = sub->add_option("--te", p.te, "emission time");
      if (key == "t0") o = sub->add_option("--t0", p.t0, "Bob's recorded arrival time");
      if (key == "E0") o = sub->add_option("--E0", p.E0, "Bob's recorded energy");
      if (key == "tmax") o = sub->add_option("--tmax", p.tmax, "diagram time extent");
      if (key == "tol") o = sub->add_option("--tol", p.tol, "simultaneity tolerance");
      if (key == "grid_n") o = sub->add_option("--grid-n", p.grid_n, "time grid size (power of two)");
      if (key == "window_start") o = sub->add_option("--window-start", p.window_start, "constraint window start");
      if (key == "epsilon") o = sub->add_option("--epsilon", p.epsilon, "delta regularization width");
      if (key == "proj_beta") o = sub->add_option("--proj-beta", p.proj_beta, "projection beta (default: --beta)");
      if (key == "n") o = sub->add_option("--n", p.n, "number of trials");
      if (key == "seed") o = sub->add_option("--seed", p.seed, "random seed");
      if (key == "threads") o = sub->add_option("--threads", p.threads, "worker threads (0: all cores)");
      opts[sub][key] = o;
    }
  };

  auto* window = app.add_subcommand("window", "print the emission window");
  add_common(window, {"d", "beta"});

  bool report_csv = false;
  auto* report = app.add_subcommand("report", "ordering and resolution report for one scenario");
  add_common(report, {"d", "beta", "te", "t0", "E0", "tol", "grid_n", "window_start", "proj_beta"});
  report->add_flag("--csv", report_csv, "print the sweep CSV row instead of key=value lines");

  std::string spec_path, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep described by a spec file");
  sweep->add_option("spec", spec_path, "sweep spec file (key=value)")->required();
  sweep->add_option("-o,--output", sweep_out, "CSV output path (overrides the spec)");

  std::string state_what = "marginals", state_out;
  bool gaussian = false;
  auto* state = app.add_subcommand("state", "dump the constrained or post-measurement state");
  add_common(state, {"d", "beta", "t0", "E0", "grid_n", "window_start", "epsilon"});
  state->add_option("--what", state_what, "marginals or profiles")->check(CLI::IsMember({"marginals", "profiles"}));
  state->add_option("-o,--out", state_out, "output path (default stdout)");
  state->add_flag("--gaussian", gaussian, "Gaussian delta regularization");

  std::string mc_dump;
  auto* mc = app.add_subcommand("mc", "Monte Carlo trials over Bob's projected state");
  add_common(mc, {"d", "beta", "te", "t0", "E0", "grid_n", "window_start", "epsilon", "proj_beta", "n", "seed",
                  "threads"});
  mc->add_option("--dump", mc_dump, "per-trial CSV path");
  mc->add_flag("--gaussian", gaussian, "Gaussian delta regularization");

  std::string diagram_out;
  auto* diagram = app.add_subcommand("diagram", "worldline polylines as CSV");
  add_common(diagram, {"d", "beta", "te", "tmax"});
  diagram->add_option("-o,--out", diagram_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (selfcheck) return run_selfcheck();

    ConfigOverlay overlay;
    overlay.load(config_path);
    const CLI::App* active = nullptr;
    for (const auto* sub : app.get_subcommands()) active = sub;
    const auto opt = [&](const char* key) -> const CLI::Option* {
      const auto it = opts.find(active);
      if (it == opts.end()) return nullptr;
      const auto found = it->second.find(key);
      return found == it->second.end() ? nullptr : found->second;
    };
    overlay.fill(opt("d"), "d", p.d);
    overlay.fill(opt("beta"), "beta", p.beta);
    overlay.fill(opt("te"), "te", p.te);
    overlay.fill(opt("t0"), "t0", p.t0);
    overlay.fill(opt("E0"), "E0", p.E0);
    overlay.fill(opt("tmax"), "tmax", p.tmax);
    overlay.fill(opt("tol"), "tol", p.tol);
    overlay.fill(opt("grid_n"), "grid_n", p.grid_n);
    overlay.fill(opt("window_start"), "window_start", p.window_start);
    overlay.fill(opt("epsilon"), "epsilon", p.epsilon);
    overlay.fill(opt("proj_beta"), "proj_beta", p.proj_beta);
    overlay.fill(opt("n"), "n", p.n);
    overlay.fill(opt("seed"), "seed", p.seed);
    overlay.fill(opt("threads"), "threads", p.threads);

    if (window->parsed()) return run_window(p);
    if (report->parsed()) return run_report(p, report_csv);
    if (sweep->parsed()) return run_sweep(spec_path, sweep_out);
    if (state->parsed()) return run_state(p, state_what, state_out, gaussian);
    if (mc->parsed()) return run_mc(p, mc_dump, gaussian);
    if (diagram->parsed()) return run_diagram(p, diagram_out);
    std::cout << app.help();
    return 0;
  } catch (const collapse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
  } catch (const std::out_of_range& e) {
    std::cerr << "range error: " << e.what() << '\n';
  } catch (const std::logic_error& e) {
    std::cerr << "state error: " << e.what() << '\n';
  }
  return kExitConfig;
}
