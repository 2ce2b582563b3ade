#pragma once

// Discretized time-energy biphoton states (natural units, hbar = c = 1).
//
// Amplitudes live on a cell-centred TimeGrid shared by the t_A and t_B axes.
// A state is a weighted sum of branches:
//   Diagonal: g(t_A) delta(t_A - t_B)
//   Product:  f_a(t_A) f_b(t_B)
// A Dirac delta is regularized on-grid as a unit-norm spike (1/sqrt(dt) on
// one cell) or, optionally, a unit-norm Gaussian of width epsilon. The
// discrete inner product is sum_ij conj(psi_ij) phi_ij dt^2.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace collapse::quantum {

using Complex = std::complex<double>;
using Profile = std::vector<Complex>;

/// n cells of width dt starting at t_start; sample i sits at the cell
/// centre t_start + (i + 1/2) dt.
class TimeGrid {
 public:
  /// Throws ParameterError unless n is a power of two >= 16 and dt > 0.
  TimeGrid(int n, double t_start, double dt);

  /// n equal cells covering exactly [lo, hi].
  static TimeGrid spanning(double lo, double hi, int n);

  /// Grid whose cell boundaries fall on both edges of the window
  /// [t_w, t_w + 2d], covering at least [t_w - 2d, t_w + 4d].
  static TimeGrid aligned(double d, double t_w, int n);

  int n() const noexcept { return n_; }
  double t_start() const noexcept { return t_start_; }
  double dt() const noexcept { return dt_; }
  double t_end() const noexcept { return t_start_ + n_ * dt_; }
  double span() const noexcept { return n_ * dt_; }
  double center(int i) const noexcept { return t_start_ + (i + 0.5) * dt_; }
  bool contains(double t) const noexcept { return t >= t_start_ && t <= t_end(); }
  /// Index of the cell containing t, clamped to [0, n).
  int cell_of(double t) const noexcept;

 private:
  int n_;
  double t_start_;
  double dt_;
};

/// Rectangular constraint on Alice's arrival time, 1/sqrt(2d) on the open
/// interval (t_w, t_w + 2d).
struct ConstraintWindow {
  double t_w;
  double width;

  static ConstraintWindow for_distance(double d);
  static ConstraintWindow for_distance(double d, double t_w);

  double height() const noexcept;
  double t_end() const noexcept { return t_w + width; }
  double center() const noexcept { return t_w + 0.5 * width; }
};

/// Pointwise Pi(t); zero at the endpoints.
double pi_window(double t, const ConstraintWindow& w);

/// Cell values of Pi on the grid: sqrt of the cell average of Pi^2, so that
/// every cell carries exactly the probability the continuous window assigns
/// to it and sum |v|^2 dt = 1 whenever the grid covers the window.
std::vector<double> pi_profile(const ConstraintWindow& w, const TimeGrid& grid);

struct Diagonal {
  Profile g;
};

struct Product {
  Profile f_a;
  Profile f_b;
};

enum class BranchRole {
  Constrained,  // g = Pi, the constrained EPR state
  Delta,        // delta(t_A - t_B) delta(t_B - t_0)
  Window,       // Pi(t_A) exp(i E_0 (t_A - t_B))
};

const char* to_string(BranchRole r);

struct StateBranch {
  std::variant<Diagonal, Product> shape;
  BranchRole role;
  Complex raw_weight;  // coefficient before renormalization
  Complex weight;      // coefficient after renormalization

  bool is_diagonal() const noexcept { return std::holds_alternative<Diagonal>(shape); }
};

enum class DeltaMode { Kronecker, Gaussian };

class DiscretizedState {
 public:
  /// Computes the grid norm of sum raw_weight * branch and rescales the
  /// weights to unit norm. Throws StateError for an empty or zero state.
  DiscretizedState(TimeGrid grid, ConstraintWindow window, std::vector<StateBranch> branches);

  const TimeGrid& grid() const noexcept { return grid_; }
  const ConstraintWindow& window() const noexcept { return window_; }
  std::span<const StateBranch> branches() const noexcept { return branches_; }
  double norm_raw() const noexcept { return norm_raw_; }
  bool renormalized() const noexcept { return renormalized_; }

  /// Norm of the state with the current (renormalized) weights.
  double norm() const;

  // Set by project_bob.
  std::optional<double> delta_center;
  double E_0 = 0.0;
  std::vector<std::string> warnings;

 private:
  TimeGrid grid_;
  ConstraintWindow window_;
  std::vector<StateBranch> branches_;
  double norm_raw_ = 0.0;
  bool renormalized_ = false;
};

/// psi_C = delta(t_A - t_B) Pi(t_A). Throws RangeError unless the grid
/// extends at least d beyond each window edge.
DiscretizedState constrained_initial_state(double d, const TimeGrid& grid);
DiscretizedState constrained_initial_state(double d, const TimeGrid& grid, double t_w);

/// (1/sqrt(pi d)) sin(d S)/S exp(-i 2 d S) for a window on [d, 3d]; the
/// S -> 0 limit sqrt(d/pi) is returned exactly.
Complex analytic_energy_rep(double d, double e_sum);
/// Same for a window at arbitrary t_w (the phase follows the window centre).
Complex analytic_energy_rep(const ConstraintWindow& w, double e_sum);

struct EnergySample {
  double e_sum;
  Complex phi;
};

/// Symmetric-convention Fourier transform (1/sqrt(2 pi)) of the diagonal
/// profile along the sum energy E_A + E_B, on the FFT frequency grid in
/// ascending order. The profile is transformed as a cell-constant function,
/// which is the exact transform whenever the grid is window-aligned.
/// Throws UnsupportedStateError for anything but a single diagonal branch.
std::vector<EnergySample> energy_representation(const DiscretizedState& state);

struct ProjectionParams {
  double beta = 0.0;  // in [0, 1]; 1 is the energy-eigenstate limit
  double t_0 = 0.0;   // Bob's recorded arrival time
  double E_0 = 0.0;   // Bob's recorded energy
  std::optional<double> epsilon;  // delta width; defaults to the grid dt
  DeltaMode mode = DeltaMode::Kronecker;
};

/// Bob's frame-dependent projection of the constrained state:
///   (1 - beta^2) delta(t_A - t_B) delta(t_B - t_0)
///     + beta^2 Pi(t_A) exp(i E_0 (t_A - t_B)),
/// then renormalized. t_0 is snapped to the nearest cell centre. Branches
/// with zero coefficient are omitted. A t_0 outside the constraint window
/// is reported in warnings().
DiscretizedState project_bob(const DiscretizedState& state, const ProjectionParams& p);

enum class Axis { A, B };

/// Cell probabilities of the t_A (or t_B) marginal, sum = norm().
std::vector<double> marginal(const DiscretizedState& state, Axis axis);

/// Variance of the t_A marginal by quadrature over cell centres.
double time_marginal_variance(const DiscretizedState& state);

/// Probability (renormalized) of the branch with the given role when the
/// branches are treated as exclusive alternatives. The Delta branch takes
/// whatever the Window branch leaves, which includes the interference term.
double branch_probability(const DiscretizedState& state, BranchRole role);

/// Alice's time uncertainty model sigma_t = beta * 2d, beta in [0, 1].
double sigma_t_paper(double beta, double d);

/// CSV `branch,kind,t,re,im` of the weighted branch profiles.
std::string profiles_csv(const DiscretizedState& state);
/// CSV `marginal,t,prob` for both marginals.
std::string marginals_csv(const DiscretizedState& state);

}  // namespace collapse::quantum
