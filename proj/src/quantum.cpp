#include "collapse/quantum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "collapse/errors.hpp"
#include "collapse/format.hpp"

namespace collapse::quantum {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Fractions this close to 0 or 1 are treated as exact cell-edge alignment.
constexpr double kEdgeSnap = 1e-12;

// Row inner product sum_j conj(B_b(i, j)) B_c(i, j) dt along the axis that is
// summed out, for the cell i on the kept axis.
class BranchAlgebra {
 public:
  BranchAlgebra(const TimeGrid& grid, std::span<const StateBranch> branches, Axis keep)
      : grid_(grid), branches_(branches), keep_(keep) {
    const auto nb = branches_.size();
    summed_.assign(nb * nb, Complex{});
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t c = 0; c < nb; ++c) {
        const auto* pb = std::get_if<Product>(&branches_[b].shape);
        const auto* pc = std::get_if<Product>(&branches_[c].shape);
        if (pb == nullptr || pc == nullptr) continue;
        const Profile& ub = other(*pb);
        const Profile& uc = other(*pc);
        Complex s{};
        for (int j = 0; j < grid_.n(); ++j) s += std::conj(ub[j]) * uc[j];
        summed_[b * nb + c] = s * grid_.dt();
      }
    }
  }

  Complex row(std::size_t b, std::size_t c, int i) const {
    const auto& sb = branches_[b].shape;
    const auto& sc = branches_[c].shape;
    const double dt = grid_.dt();
    const auto* db = std::get_if<Diagonal>(&sb);
    const auto* dc = std::get_if<Diagonal>(&sc);
    if (db != nullptr && dc != nullptr) {
      return std::conj(db->g[i]) * dc->g[i];
    }
    if (db != nullptr) {
      const auto& p = std::get<Product>(sc);
      return std::conj(db->g[i]) * p.f_a[i] * p.f_b[i] * std::sqrt(dt);
    }
    if (dc != nullptr) {
      const auto& p = std::get<Product>(sb);
      return std::conj(p.f_a[i] * p.f_b[i]) * dc->g[i] * std::sqrt(dt);
    }
    const auto& pb = std::get<Product>(sb);
    const auto& pc = std::get<Product>(sc);
    return std::conj(kept(pb)[i]) * kept(pc)[i] * summed_[b * branches_.size() + c];
  }

 private:
  const Profile& kept(const Product& p) const { return keep_ == Axis::A ? p.f_a : p.f_b; }
  const Profile& other(const Product& p) const { return keep_ == Axis::A ? p.f_b : p.f_a; }

  const TimeGrid& grid_;
  std::span<const StateBranch> branches_;
  Axis keep_;
  std::vector<Complex> summed_;
};

template <typename WeightOf>
std::vector<double> marginal_with(const TimeGrid& grid, std::span<const StateBranch> branches,
                                  Axis axis, WeightOf weight_of) {
  const BranchAlgebra algebra(grid, branches, axis);
  std::vector<double> mass(grid.n(), 0.0);
  const auto nb = branches.size();
  for (int i = 0; i < grid.n(); ++i) {
    Complex acc{};
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t c = 0; c < nb; ++c) {
        acc += std::conj(weight_of(branches[b])) * weight_of(branches[c]) * algebra.row(b, c, i);
      }
    }
    mass[i] = acc.real() * grid.dt();
  }
  return mass;
}

double total(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double squared_norm(const Profile& f, double dt) {
  double s = 0.0;
  for (const auto& z : f) s += std::norm(z);
  return s * dt;
}

Profile regularized_delta(const TimeGrid& grid, int center_cell, double epsilon, DeltaMode mode) {
  Profile f(grid.n(), Complex{});
  if (mode == DeltaMode::Kronecker) {
    f[center_cell] = 1.0 / std::sqrt(grid.dt());
    return f;
  }
  // Gaussian amplitude whose |.|^2 has standard deviation epsilon.
  const double t0 = grid.center(center_cell);
  for (int i = 0; i < grid.n(); ++i) {
    const double u = (grid.center(i) - t0) / epsilon;
    f[i] = std::exp(-0.25 * u * u);
  }
  const double scale = 1.0 / std::sqrt(squared_norm(f, grid.dt()));
  for (auto& z : f) z *= scale;
  return f;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// ---------------------------------------------------------------- TimeGrid

TimeGrid::TimeGrid(int n, double t_start, double dt) : n_(n), t_start_(t_start), dt_(dt) {
  if (n < 16 || !is_power_of_two(n)) {
    throw ParameterError("grid size must be a power of two >= 16, got " + std::to_string(n));
  }
  if (!(std::isfinite(dt) && dt > 0.0) || !std::isfinite(t_start)) {
    throw ParameterError("grid spacing must be finite and > 0");
  }
}

TimeGrid TimeGrid::spanning(double lo, double hi, int n) {
  if (!(hi > lo)) throw ParameterError("grid span must have hi > lo");
  return TimeGrid(n, lo, (hi - lo) / n);
}

TimeGrid TimeGrid::aligned(double d, double t_w, int n) {
  if (!(std::isfinite(d) && d > 0.0)) throw DomainError("d must be > 0");
  if (n < 16 || !is_power_of_two(n)) {
    throw ParameterError("grid size must be a power of two >= 16, got " + std::to_string(n));
  }
  const int per_window = n / 3;
  const double dt = 2.0 * d / per_window;
  const int spare_left = (n - 3 * per_window) / 2;
  return TimeGrid(n, t_w - 2.0 * d - spare_left * dt, dt);
}

int TimeGrid::cell_of(double t) const noexcept {
  const auto i = static_cast<long long>(std::floor((t - t_start_) / dt_));
  return static_cast<int>(std::clamp<long long>(i, 0, n_ - 1));
}

// -------------------------------------------------------- ConstraintWindow

ConstraintWindow ConstraintWindow::for_distance(double d) { return for_distance(d, d); }

ConstraintWindow ConstraintWindow::for_distance(double d, double t_w) {
  if (!(std::isfinite(d) && d > 0.0)) throw DomainError("d must be > 0");
  if (!std::isfinite(t_w)) throw DomainError("window start must be finite");
  return {t_w, 2.0 * d};
}

double ConstraintWindow::height() const noexcept { return 1.0 / std::sqrt(width); }

double pi_window(double t, const ConstraintWindow& w) {
  return (t > w.t_w && t < w.t_end()) ? w.height() : 0.0;
}

std::vector<double> pi_profile(const ConstraintWindow& w, const TimeGrid& grid) {
  std::vector<double> v(grid.n(), 0.0);
  const double dt = grid.dt();
  for (int i = 0; i < grid.n(); ++i) {
    const double lo = std::max(grid.t_start() + i * dt, w.t_w);
    const double hi = std::min(grid.t_start() + (i + 1) * dt, w.t_end());
    double frac = std::max(hi - lo, 0.0) / dt;
    if (frac < kEdgeSnap) frac = 0.0;
    if (frac > 1.0 - kEdgeSnap) frac = 1.0;
    v[i] = w.height() * std::sqrt(frac);
  }
  return v;
}

const char* to_string(BranchRole r) {
  switch (r) {
    case BranchRole::Constrained:
      return "constrained";
    case BranchRole::Delta:
      return "delta";
    case BranchRole::Window:
      return "window";
  }
  return "unknown";
}

// -------------------------------------------------------- DiscretizedState

DiscretizedState::DiscretizedState(TimeGrid grid, ConstraintWindow window,
                                   std::vector<StateBranch> branches)
    : grid_(grid), window_(window), branches_(std::move(branches)) {
  if (branches_.empty()) throw StateError("a state needs at least one branch");
  for (const auto& b : branches_) {
    const bool ok = std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Diagonal>) {
            return static_cast<int>(s.g.size()) == grid_.n();
          } else {
            return static_cast<int>(s.f_a.size()) == grid_.n() &&
                   static_cast<int>(s.f_b.size()) == grid_.n();
          }
        },
        b.shape);
    if (!ok) throw StateError("branch profile length does not match the grid");
  }
  norm_raw_ = total(marginal_with(grid_, branches_, Axis::A,
                                  [](const StateBranch& b) { return b.raw_weight; }));
  if (!(norm_raw_ > 0.0) || !std::isfinite(norm_raw_)) {
    throw StateError("state has zero or non-finite norm");
  }
  const double scale = 1.0 / std::sqrt(norm_raw_);
  for (auto& b : branches_) b.weight = b.raw_weight * scale;
  renormalized_ = true;
}

double DiscretizedState::norm() const { return total(marginal(*this, Axis::A)); }

std::vector<double> marginal(const DiscretizedState& state, Axis axis) {
  return marginal_with(state.grid(), state.branches(), axis,
                       [](const StateBranch& b) { return b.weight; });
}

// ------------------------------------------------------------- constructors

DiscretizedState constrained_initial_state(double d, const TimeGrid& grid) {
  return constrained_initial_state(d, grid, d);
}

DiscretizedState constrained_initial_state(double d, const TimeGrid& grid, double t_w) {
  const auto w = ConstraintWindow::for_distance(d, t_w);
  // Allow a little slack for aligned grids whose edges are computed values.
  const double slack = 1e-9 * d;
  if (grid.t_start() > w.t_w - d + slack || grid.t_end() < w.t_end() + d - slack) {
    throw RangeError("grid [" + num(grid.t_start()) + ", " + num(grid.t_end()) +
                     "] must extend at least d beyond the window [" + num(w.t_w) + ", " +
                     num(w.t_end()) + "]");
  }
  const auto pi = pi_profile(w, grid);
  Diagonal diag{Profile(pi.begin(), pi.end())};
  std::vector<StateBranch> branches;
  branches.push_back({std::move(diag), BranchRole::Constrained, 1.0, 1.0});
  return DiscretizedState(grid, w, std::move(branches));
}

// ------------------------------------------------------ energy representation

Complex analytic_energy_rep(double d, double e_sum) {
  return analytic_energy_rep(ConstraintWindow::for_distance(d), e_sum);
}

Complex analytic_energy_rep(const ConstraintWindow& w, double e_sum) {
  const double half = 0.5 * w.width;  // d
  const double pref = 1.0 / std::sqrt(std::numbers::pi * half);
  // sin(dS)/S, with the series near S = 0.
  const double x = half * e_sum;
  double kernel;
  if (std::abs(x) < 1e-4) {
    kernel = half * (1.0 - x * x / 6.0);
  } else {
    kernel = std::sin(x) / e_sum;
  }
  return pref * kernel * std::polar(1.0, -w.center() * e_sum);
}

std::vector<EnergySample> energy_representation(const DiscretizedState& state) {
  const auto branches = state.branches();
  if (branches.size() != 1 || !branches.front().is_diagonal()) {
    throw UnsupportedStateError("energy representation needs a single diagonal branch");
  }
  const auto& grid = state.grid();
  const int n = grid.n();
  const double dt = grid.dt();
  const auto& g = std::get<Diagonal>(branches.front().shape).g;
  const Complex w = branches.front().weight;

  std::vector<Complex> in(n), out(n);
  for (int i = 0; i < n; ++i) in[i] = w * g[i];
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  const double de = 2.0 * std::numbers::pi / (n * dt);
  const double t0 = grid.center(0);
  const double norm = dt / std::sqrt(2.0 * std::numbers::pi);
  std::vector<EnergySample> spectrum;
  spectrum.reserve(n);
  for (int k = -n / 2; k < n / 2; ++k) {
    const double e = k * de;
    const double x = 0.5 * e * dt;
    const double cell = (x == 0.0) ? 1.0 : std::sin(x) / x;
    const Complex v = out[(k + n) % n] * std::polar(norm * cell, -e * t0);
    spectrum.push_back({e, v});
  }
  return spectrum;
}

// --------------------------------------------------------------- projection

DiscretizedState project_bob(const DiscretizedState& state, const ProjectionParams& p) {
  const auto in = state.branches();
  if (in.size() != 1 || !in.front().is_diagonal()) {
    throw UnsupportedStateError("Bob's projection applies to the constrained initial state");
  }
  if (!(std::isfinite(p.beta) && p.beta >= 0.0 && p.beta <= 1.0)) {
    throw DomainError("projection beta must lie in [0, 1], got " + num(p.beta));
  }
  const auto& grid = state.grid();
  const double epsilon = p.epsilon.value_or(grid.dt());
  if (!(epsilon > 0.0 && epsilon <= 2.0 * grid.dt())) {
    throw ParameterError("epsilon must satisfy 0 < epsilon <= 2 dt, got " + num(epsilon));
  }
  if (!std::isfinite(p.t_0) || !grid.contains(p.t_0)) {
    throw ParameterError("t_0 = " + num(p.t_0) + " lies outside the grid span");
  }
  if (!std::isfinite(p.E_0)) throw ParameterError("E_0 must be finite");

  const auto& window = state.window();
  const int cell = grid.cell_of(p.t_0);
  const double a = 1.0 - p.beta * p.beta;
  const double b = p.beta * p.beta;

  std::vector<StateBranch> branches;
  if (a > 0.0) {
    Profile delta = regularized_delta(grid, cell, epsilon, p.mode);
    branches.push_back({Product{delta, delta}, BranchRole::Delta, a, a});
  }
  if (b > 0.0) {
    const auto& pi = std::get<Diagonal>(in.front().shape).g;
    const Complex w0 = in.front().weight;
    Profile f_a(grid.n()), f_b(grid.n());
    for (int i = 0; i < grid.n(); ++i) {
      const double t = grid.center(i);
      f_a[i] = w0 * pi[i] * std::polar(1.0, p.E_0 * t);
      f_b[i] = std::polar(1.0, -p.E_0 * t);
    }
    branches.push_back({Product{std::move(f_a), std::move(f_b)}, BranchRole::Window, b, b});
  }

  DiscretizedState out(grid, window, std::move(branches));
  out.delta_center = grid.center(cell);
  out.E_0 = p.E_0;
  if (!(p.t_0 > window.t_w && p.t_0 < window.t_end())) {
    out.warnings.push_back("t_0 = " + num(p.t_0) + " lies outside the constraint window (" +
                           num(window.t_w) + ", " + num(window.t_end()) + ")");
  }
  return out;
}

// ---------------------------------------------------------------- diagnostics

double time_marginal_variance(const DiscretizedState& state) {
  const auto m = marginal(state, Axis::A);
  const auto& grid = state.grid();
  const double z = total(m);
  double mean = 0.0;
  for (int i = 0; i < grid.n(); ++i) mean += m[i] * grid.center(i);
  mean /= z;
  double var = 0.0;
  for (int i = 0; i < grid.n(); ++i) {
    const double u = grid.center(i) - mean;
    var += m[i] * u * u;
  }
  return var / z;
}

double branch_probability(const DiscretizedState& state, BranchRole role) {
  const double dt = state.grid().dt();
  double window = 0.0;
  bool has_role = false;
  for (const auto& b : state.branches()) {
    if (b.role == role) has_role = true;
    if (b.role != BranchRole::Window) continue;
    const auto& p = std::get<Product>(b.shape);
    window += std::norm(b.weight) * squared_norm(p.f_a, dt) * squared_norm(p.f_b, dt);
  }
  if (!has_role) return 0.0;
  switch (role) {
    case BranchRole::Window:
      return window;
    case BranchRole::Delta:
      return 1.0 - window;
    case BranchRole::Constrained:
      return 1.0;
  }
  return 0.0;
}

double sigma_t_paper(double beta, double d) {
  if (!(std::isfinite(beta) && beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("beta must lie in [0, 1], got " + num(beta));
  }
  if (!(std::isfinite(d) && d > 0.0)) throw DomainError("d must be > 0");
  return beta * 2.0 * d;
}

// ---------------------------------------------------------------------- CSV

std::string profiles_csv(const DiscretizedState& state) {
  const auto& grid = state.grid();
  std::string out = "branch,kind,t,re,im\n";
  const auto emit = [&](std::size_t idx, const char* kind, const Profile& f, Complex w) {
    for (int i = 0; i < grid.n(); ++i) {
      const Complex z = w * f[i];
      out += std::to_string(idx) + ',' + kind + ',' + num(grid.center(i)) + ',' +
             num(z.real()) + ',' + num(z.imag()) + '\n';
    }
  };
  const auto branches = state.branches();
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& br = branches[b];
    if (const auto* d = std::get_if<Diagonal>(&br.shape)) {
      emit(b, "diagonal", d->g, br.weight);
    } else {
      const auto& p = std::get<Product>(br.shape);
      emit(b, "product_a", p.f_a, br.weight);
      emit(b, "product_b", p.f_b, 1.0);
    }
  }
  return out;
}

std::string marginals_csv(const DiscretizedState& state) {
  const auto& grid = state.grid();
  std::string out = "marginal,t,prob\n";
  for (const auto axis : {Axis::A, Axis::B}) {
    const auto m = marginal(state, axis);
    const char* name = axis == Axis::A ? "t_A" : "t_B";
    for (int i = 0; i < grid.n(); ++i) {
      out += std::string(name) + ',' + num(grid.center(i)) + ',' + num(m[i]) + '\n';
    }
  }
  return out;
}

}  // namespace collapse::quantum
