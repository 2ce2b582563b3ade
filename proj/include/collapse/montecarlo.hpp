#pragma once

// Repeated-trial sampling of the post-measurement state. Each trial draws
// its own random stream from (seed, trial index), so results do not depend
// on how trials are scheduled.

#include <cstdint>
#include <string>
#include <vector>

#include "collapse/kinematics.hpp"
#include "collapse/quantum.hpp"

namespace collapse::montecarlo {

/// SplitMix64 stream keyed by (seed, stream index).
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

 private:
  std::uint64_t state_;
};

enum class Branch { Delta, Window };
const char* to_string(Branch b);

struct TrialOutcome {
  double t_A;
  double t_B;
  Branch branch;
};

/// Branch probabilities and sampling ranges extracted once from a projected
/// state. Window outcomes: t_A uniform on the constraint window, t_B uniform
/// over the grid span (the window branch has no normalizable t_B marginal).
class OutcomeSampler {
 public:
  /// Throws StateError if the state is not normalized to 1e-9 or is not a
  /// project_bob output.
  explicit OutcomeSampler(const quantum::DiscretizedState& state);

  TrialOutcome operator()(TrialRng& rng) const noexcept;

  double delta_probability() const noexcept { return p_delta_; }
  double t_0() const noexcept { return t_0_; }

 private:
  double p_delta_;
  double t_0_;
  double window_lo_;
  double window_width_;
  double span_lo_;
  double span_width_;
};

TrialOutcome sample_outcome(const quantum::DiscretizedState& state, TrialRng& rng);

struct McStats {
  std::uint64_t n_trials = 0;
  double delta_fraction = 0.0;
  double empirical_mean_tA = 0.0;
  double empirical_var_tA = 0.0;
  double flip_fraction = 0.0;
  std::uint64_t seed = 0;

  // Reference values from the state and the standard errors used to compare.
  double delta_probability = 0.0;
  double var_tA_expected = 0.0;
  double se_delta_fraction = 0.0;
  double se_var_tA = 0.0;

  /// Both empirical quantities lie within k standard errors of the state.
  bool consistent(double k = 3.0) const noexcept;
};

struct RunOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  std::vector<TrialOutcome>* outcomes = nullptr;  // optional per-trial dump
};

/// p.beta drives the projection; cfg.beta drives the ordering test for the
/// flip fraction (Bob's detection at x = beta t_B, Alice's at x = -d).
/// Throws ParameterError for n < 1.
McStats run_trials(const kinematics::ExperimentConfig& cfg, const quantum::ProjectionParams& p,
                   std::uint64_t n, std::uint64_t seed, const RunOptions& opts = {});

const std::string& stats_csv_header();
std::string stats_csv_row(const McStats& s);
/// `trial,t_A,t_B,branch`
std::string outcomes_csv(const std::vector<TrialOutcome>& outcomes);

}  // namespace collapse::montecarlo
