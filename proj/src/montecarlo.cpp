#include "collapse/montecarlo.hpp"

#include <cmath>

#include "collapse/errors.hpp"
#include "collapse/format.hpp"
#include "collapse/parallel.hpp"

namespace collapse::montecarlo {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : state_(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x632BE59BD9B4E019ULL)) {}

std::uint64_t TrialRng::next() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

double TrialRng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

const char* to_string(Branch b) { return b == Branch::Delta ? "Delta" : "Window"; }

OutcomeSampler::OutcomeSampler(const quantum::DiscretizedState& state) {
  const double norm = state.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    throw StateError("sampling needs a normalized state, norm = " + num(norm));
  }
  bool projected = false;
  for (const auto& b : state.branches()) {
    projected = projected || b.role == quantum::BranchRole::Delta ||
                b.role == quantum::BranchRole::Window;
  }
  if (!projected) throw StateError("sampling needs a state produced by project_bob");

  p_delta_ = quantum::branch_probability(state, quantum::BranchRole::Delta);
  t_0_ = state.delta_center.value_or(state.window().center());
  window_lo_ = state.window().t_w;
  window_width_ = state.window().width;
  span_lo_ = state.grid().t_start();
  span_width_ = state.grid().span();
}

TrialOutcome OutcomeSampler::operator()(TrialRng& rng) const noexcept {
  // Fixed draw count per trial.
  const double u_branch = rng.uniform();
  const double u_a = rng.uniform();
  const double u_b = rng.uniform();
  if (u_branch < p_delta_) return {t_0_, t_0_, Branch::Delta};
  return {window_lo_ + window_width_ * u_a, span_lo_ + span_width_ * u_b, Branch::Window};
}

TrialOutcome sample_outcome(const quantum::DiscretizedState& state, TrialRng& rng) {
  return OutcomeSampler(state)(rng);
}

bool McStats::consistent(double k) const noexcept {
  const double delta_tol = std::max(k * se_delta_fraction, 1e-12);
  const double var_tol = std::max(k * se_var_tA, 1e-12 * std::max(1.0, var_tA_expected));
  return std::abs(delta_fraction - delta_probability) <= delta_tol &&
         std::abs(empirical_var_tA - var_tA_expected) <= var_tol;
}

McStats run_trials(const kinematics::ExperimentConfig& cfg, const quantum::ProjectionParams& p,
                   std::uint64_t n, std::uint64_t seed, const RunOptions& opts) {
  if (n < 1) throw ParameterError("number of trials must be >= 1");
  const double t_w = cfg.effective_window_start();
  const auto grid = quantum::TimeGrid::aligned(cfg.d, t_w, cfg.grid_n);
  const auto state = quantum::project_bob(quantum::constrained_initial_state(cfg.d, grid, t_w), p);
  const OutcomeSampler sampler(state);

  std::vector<TrialOutcome> local;
  std::vector<TrialOutcome>& outcomes = opts.outcomes != nullptr ? *opts.outcomes : local;
  outcomes.assign(n, TrialOutcome{});
  parallel_for(n, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      TrialRng rng(seed, i);
      outcomes[i] = sampler(rng);
    }
  });

  // Serial reduction in trial order.
  const double beta = cfg.beta();
  std::uint64_t deltas = 0;
  std::uint64_t flips = 0;
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.branch == Branch::Delta) ++deltas;
    sum += o.t_A;
    const double dt_lab = o.t_B - o.t_A;
    const double dx_lab = beta * o.t_B + cfg.d;
    const double dt_boost = dt_lab - beta * dx_lab;  // sign of gamma (...)
    if ((dt_lab > 0.0 && dt_boost < 0.0) || (dt_lab < 0.0 && dt_boost > 0.0)) ++flips;
  }
  const double count = static_cast<double>(n);
  const double mean = sum / count;
  double m2 = 0.0;
  double m4 = 0.0;
  for (const auto& o : outcomes) {
    const double u = o.t_A - mean;
    m2 += u * u;
    m4 += u * u * u * u;
  }
  m2 /= count;
  m4 /= count;

  McStats s;
  s.n_trials = n;
  s.seed = seed;
  s.delta_fraction = static_cast<double>(deltas) / count;
  s.flip_fraction = static_cast<double>(flips) / count;
  s.empirical_mean_tA = mean;
  s.empirical_var_tA = n > 1 ? m2 * count / (count - 1.0) : 0.0;
  s.delta_probability = sampler.delta_probability();
  s.var_tA_expected = quantum::time_marginal_variance(state);
  const double pd = s.delta_probability;
  s.se_delta_fraction = std::sqrt(pd * (1.0 - pd) / count);
  s.se_var_tA = std::sqrt(std::max(m4 - m2 * m2, 0.0) / count);
  return s;
}

const std::string& stats_csv_header() {
  static const std::string header =
      "n_trials,seed,delta_fraction,delta_probability,mean_tA,var_tA,var_tA_expected,"
      "flip_fraction,tB_sampling";
  return header;
}

std::string stats_csv_row(const McStats& s) {
  return std::to_string(s.n_trials) + ',' + std::to_string(s.seed) + ',' +
         num(s.delta_fraction) + ',' + num(s.delta_probability) + ',' +
         num(s.empirical_mean_tA) + ',' + num(s.empirical_var_tA) + ',' +
         num(s.var_tA_expected) + ',' + num(s.flip_fraction) + ",uniform_grid_span";
}

std::string outcomes_csv(const std::vector<TrialOutcome>& outcomes) {
  std::string out = "trial,t_A,t_B,branch\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    out += std::to_string(i) + ',' + num(o.t_A) + ',' + num(o.t_B) + ',' + to_string(o.branch) +
           '\n';
  }
  return out;
}

}  // namespace collapse::montecarlo
