#include "collapse/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "collapse/errors.hpp"
#include "collapse/format.hpp"

namespace collapse::analysis {

namespace {

ResolutionReport resolve_unchecked(double delta_t, double d, kinematics::Velocity v) {
  const double g = v.gamma();
  const double b = v.beta();
  ResolutionReport r{};
  r.delta_t_prime = kinematics::delta_t_paper_model(delta_t, d, v);
  r.sigma_t = quantum::sigma_t_paper(b, d);
  r.sigma_t_prime = g * r.sigma_t;
  r.upper = r.delta_t_prime + r.sigma_t_prime;
  r.lower = r.delta_t_prime - r.sigma_t_prime;
  r.identity_residual = std::abs(r.upper - g * delta_t * (1.0 - b * b));
  return r;
}

}  // namespace

double default_t0(const kinematics::ExperimentConfig& cfg) {
  const auto window = kinematics::emission_window(cfg.d, cfg.velocity);
  return cfg.effective_window_start() + (cfg.t_e - window.t_e_min);
}

ResolutionReport resolve(double delta_t, double d, kinematics::Velocity v) {
  if (!(std::isfinite(delta_t) && delta_t > 0.0)) {
    throw DomainError("resolve needs delta_t > 0 (Alice first in the lab frame), got " +
                      num(delta_t));
  }
  if (!(std::isfinite(d) && d > 0.0)) throw DomainError("d must be > 0");
  return resolve_unchecked(delta_t, d, v);
}

std::string FullReport::verdict() const {
  if (resolution.straddles_zero()) return "ordering indeterminate within uncertainty";
  return resolution.lower >= 0.0 ? "Alice first within uncertainty"
                                 : "Bob first within uncertainty";
}

FullReport full_report(const kinematics::ExperimentConfig& cfg, const ReportOptions& opts) {
  FullReport r{};
  r.d = cfg.d;
  r.beta = cfg.beta();
  r.t_e = cfg.t_e;
  const auto window = kinematics::emission_window(cfg.d, cfg.velocity);
  r.in_window = cfg.t_e > window.t_e_min && cfg.t_e < window.t_e_max;
  r.ordering = kinematics::classify_ordering(cfg);
  r.resolution = resolve_unchecked(std::abs(r.ordering.delta_t_lab), cfg.d, cfg.velocity);

  const double proj_beta = opts.projection_beta.value_or(cfg.beta());
  r.sigma_t_paper = quantum::sigma_t_paper(proj_beta, cfg.d);

  const auto grid =
      quantum::TimeGrid::aligned(cfg.d, cfg.effective_window_start(), cfg.grid_n);
  const auto initial =
      quantum::constrained_initial_state(cfg.d, grid, cfg.effective_window_start());
  quantum::ProjectionParams p;
  p.beta = proj_beta;
  p.t_0 = std::clamp(opts.t_0.value_or(default_t0(cfg)), grid.center(0),
                     grid.center(grid.n() - 1));
  p.E_0 = opts.E_0;
  const auto projected = quantum::project_bob(initial, p);
  r.var_tA_numeric = quantum::time_marginal_variance(projected);
  r.norm_raw = projected.norm_raw();
  r.warnings = projected.warnings;
  if (!r.in_window) {
    r.warnings.push_back("t_e outside the emission window; observers agree on the ordering");
  }
  return r;
}

const std::string& report_csv_header() {
  static const std::string header =
      "d,beta,t_e,dt_lab,dt_bob_exact,dt_bob_paper,regime,sigma_t_paper,var_tA_numeric,upper,"
      "lower,norm_raw";
  return header;
}

std::string report_csv_row(const FullReport& r) {
  std::string row;
  for (const double v : {r.d, r.beta, r.t_e, r.ordering.delta_t_lab,
                         r.ordering.delta_t_bob_exact, r.ordering.delta_t_bob_paper}) {
    row += num(v) + ',';
  }
  row += std::string(kinematics::to_string(r.ordering.regime));
  for (const double v : {r.sigma_t_paper, r.var_tA_numeric, r.resolution.upper,
                         r.resolution.lower, r.norm_raw}) {
    row += ',' + num(v);
  }
  return row;
}

}  // namespace collapse::analysis
