#pragma once

#include <optional>
#include <string>
#include <vector>

#include "collapse/kinematics.hpp"
#include "collapse/quantum.hpp"

namespace collapse::analysis {

/// The boosted difference with Alice's time uncertainty attached:
/// delta_t' +/- gamma * sigma_t.
struct ResolutionReport {
  double delta_t_prime;  // delta_t_paper_model
  double sigma_t;        // beta * 2d
  double sigma_t_prime;  // gamma * sigma_t
  double upper;          // delta_t' + sigma_t'
  double lower;          // delta_t' - sigma_t'
  double identity_residual;  // |upper - gamma dt (1 - beta^2)|

  bool straddles_zero() const noexcept { return lower < 0.0 && upper > 0.0; }
};

/// Requires delta_t > 0 (Alice first in the lab) and d > 0; throws
/// DomainError otherwise.
ResolutionReport resolve(double delta_t, double d, kinematics::Velocity v);

/// Bob's arrival time used when none is given: the emission window
/// [t_e_min, t_e_max] mapped onto the constraint window [t_w, t_w + 2d].
double default_t0(const kinematics::ExperimentConfig& cfg);

struct ReportOptions {
  // Overrides for Bob's projection; by default beta = cfg.beta,
  // t_0 = default_t0(cfg) clamped into the grid, E_0 = 0.
  std::optional<double> projection_beta;
  std::optional<double> t_0;
  double E_0 = 0.0;
};

struct FullReport {
  double d;
  double beta;
  double t_e;
  bool in_window;
  kinematics::OrderingReport ordering;
  ResolutionReport resolution;
  double sigma_t_paper;
  double var_tA_numeric;
  double norm_raw;
  std::vector<std::string> warnings;

  /// "ordering indeterminate within uncertainty" when the band straddles
  /// zero, otherwise the sign-definite ordering.
  std::string verdict() const;
};

FullReport full_report(const kinematics::ExperimentConfig& cfg, const ReportOptions& opts = {});

/// Column names of the sweep CSV.
const std::string& report_csv_header();
/// One CSV line (no trailing newline) in the order of report_csv_header().
std::string report_csv_row(const FullReport& r);

}  // namespace collapse::analysis
