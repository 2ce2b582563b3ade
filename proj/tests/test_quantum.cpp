#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "collapse/errors.hpp"
#include "collapse/quantum.hpp"

using namespace collapse::quantum;

namespace {

// Dense amplitude matrix psi[i][j] on small grids, assembled straight from
// the closed forms with the pointwise window. Used to check the branch
// algebra.
struct Dense {
  int n;
  double dt;
  std::vector<Complex> psi;  // row-major, i = t_A, j = t_B

  Complex& at(int i, int j) { return psi[static_cast<std::size_t>(i) * n + j]; }
  Complex at(int i, int j) const { return psi[static_cast<std::size_t>(i) * n + j]; }

  double norm() const {
    double s = 0;
    for (const auto& z : psi) s += std::norm(z);
    return s * dt * dt;
  }
  std::vector<double> marginal(Axis axis) const {
    std::vector<double> m(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[axis == Axis::A ? i : j] += std::norm(at(i, j)) * dt * dt;
    return m;
  }
};

Dense dense_constrained(const TimeGrid& g, const ConstraintWindow& w) {
  Dense d{g.n(), g.dt(), std::vector<Complex>(static_cast<std::size_t>(g.n()) * g.n())};
  for (int i = 0; i < g.n(); ++i) d.at(i, i) = pi_window(g.center(i), w) / std::sqrt(g.dt());
  return d;
}

Dense dense_projected(const TimeGrid& g, const ConstraintWindow& w, double beta, double t0, double e0) {
  Dense d{g.n(), g.dt(), std::vector<Complex>(static_cast<std::size_t>(g.n()) * g.n())};
  const int c = static_cast<int>(std::floor((t0 - g.t_start()) / g.dt()));
  const double a = 1 - beta * beta, b = beta * beta;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      Complex v = b * pi_window(g.center(i), w) * std::polar(1.0, e0 * (g.center(i) - g.center(j)));
      if (i == c && j == c) v += a / g.dt();
      d.at(i, j) = v;
    }
  }
  return d;
}

double variance_of(const std::vector<double>& m, const TimeGrid& g) {
  double z = 0, mean = 0, var = 0;
  for (int i = 0; i < g.n(); ++i) { z += m[i]; mean += m[i] * g.center(i); }
  mean /= z;
  for (int i = 0; i < g.n(); ++i) var += m[i] * (g.center(i) - mean) * (g.center(i) - mean);
  return var / z;
}

double spectral_error(const std::vector<EnergySample>& spectrum, double d) {
  double err = 0, ref = 0;
  for (const auto& s : spectrum) {
    const auto a = analytic_energy_rep(d, s.e_sum);
    err += std::norm(s.phi - a);
    ref += std::norm(a);
  }
  return std::sqrt(err / ref);
}

}  // namespace

TEST_CASE("TimeGrid validation and construction") {
  CHECK_THROWS_AS(TimeGrid(15, 0.0, 0.1), collapse::ParameterError);
  CHECK_THROWS_AS(TimeGrid(8, 0.0, 0.1), collapse::ParameterError);
  CHECK_THROWS_AS(TimeGrid(48, 0.0, 0.1), collapse::ParameterError);
  CHECK_THROWS_AS(TimeGrid(64, 0.0, 0.0), collapse::ParameterError);

  const auto g = TimeGrid::aligned(1.0, 1.0, 4096);
  CHECK(g.t_start() == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(g.t_end() >= 5.0);
  // window edges on cell boundaries
  const double k_lo = (1.0 - g.t_start()) / g.dt();
  const double k_hi = (3.0 - g.t_start()) / g.dt();
  CHECK(std::abs(k_lo - std::round(k_lo)) < 1e-9);
  CHECK(std::abs(k_hi - std::round(k_hi)) < 1e-9);

  for (const int n : {16, 32, 1024}) {
    const auto a = TimeGrid::aligned(2.0, 0.5, n);
    CHECK(a.t_start() <= 0.5 - 4.0 + 1e-12);
    CHECK(a.t_end() >= 0.5 + 8.0 - 1e-12);
  }
}

TEST_CASE("pi_window pointwise values") {
  const auto w = ConstraintWindow::for_distance(1.0);
  CHECK(pi_window(2.0, w) == doctest::Approx(0.70710678118654752).epsilon(1e-15));
  CHECK(pi_window(0.0, w) == 0.0);
  CHECK(pi_window(1.0, w) == 0.0);
  CHECK(pi_window(3.0, w) == 0.0);
  CHECK(w.height() * w.height() * w.width == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("pi_window has unit norm by quadrature") {
  for (const double d : {0.01, 0.3, 1.0, 7.5, 100.0}) {
    const auto w = ConstraintWindow::for_distance(d);
    // Trapezoid rule on [0, 4d] whose nodes straddle the jumps symmetrically.
    const int m = 20000;
    const double h = 2 * d / m;
    double sum = 0;
    for (int k = 0; k < 2 * m; ++k) sum += std::pow(pi_window((k + 0.5) * h, w), 2);
    CHECK(sum * h == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("pi_profile keeps unit norm on unaligned grids") {
  for (const int n : {64, 1024, 4096}) {
    for (const double d : {0.7, 1.0, 3.3}) {
      const auto g = TimeGrid::spanning(-1.37 * d, 5.11 * d, n);
      const auto v = pi_profile(ConstraintWindow::for_distance(d), g);
      double s = 0;
      for (double x : v) s += x * x;
      CHECK(s * g.dt() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("constrained initial state") {
  const double d = 1.0;
  const auto g = TimeGrid::aligned(d, d, 4096);
  const auto s = constrained_initial_state(d, g);
  REQUIRE(s.branches().size() == 1);
  CHECK(s.branches()[0].is_diagonal());
  CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.norm_raw() == doctest::Approx(1.0).epsilon(1e-12));

  const auto m = marginal(s, Axis::A);
  const double p_cell = g.dt() / (2 * d);
  double mean = 0;
  for (int i = 0; i < g.n(); ++i) {
    const double t = g.center(i);
    if (t > d && t < 3 * d) REQUIRE(m[i] == doctest::Approx(p_cell).epsilon(1e-12));
    else REQUIRE(m[i] == 0.0);
    mean += m[i] * t;
  }
  CHECK(std::abs(mean - 2 * d) <= g.dt());
  // (2d)^2 / 12 for a uniform window
  CHECK(time_marginal_variance(s) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));

  CHECK_THROWS_AS(constrained_initial_state(d, TimeGrid::spanning(0.5, 3.5, 64)), collapse::RangeError);
  CHECK_THROWS_AS(constrained_initial_state(d, TimeGrid::spanning(-0.5, 3.5, 64)), collapse::RangeError);
}

TEST_CASE("constrained state matches the dense oracle and is purely diagonal") {
  const double d = 1.0;
  const auto g = TimeGrid::aligned(d, d, 128);
  const auto s = constrained_initial_state(d, g);
  const auto dense = dense_constrained(g, s.window());
  CHECK(dense.norm() == doctest::Approx(s.norm()).epsilon(1e-12));
  double off = 0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      if (i != j) off += std::norm(dense.at(i, j)) * g.dt() * g.dt();
  CHECK(off == 0.0);
  const auto ma = marginal(s, Axis::A), mb = marginal(s, Axis::B), da = dense.marginal(Axis::A);
  for (int i = 0; i < g.n(); ++i) {
    REQUIRE(ma[i] == doctest::Approx(da[i]).epsilon(1e-12));
    REQUIRE(mb[i] == doctest::Approx(da[i]).epsilon(1e-12));
  }
}

TEST_CASE("analytic energy representation") {
  CHECK(std::abs(analytic_energy_rep(1.0, 0.0)) == doctest::Approx(0.56418958354775628).epsilon(1e-15));
  CHECK(std::abs(analytic_energy_rep(1.0, 1e-9)) == doctest::Approx(0.56418958354775628).epsilon(1e-12));
  CHECK(std::abs(analytic_energy_rep(1.0, std::numbers::pi)) < 1e-15);
  CHECK(std::abs(analytic_energy_rep(2.0, 0.0)) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));

  // Continuity across the small-argument switch.
  for (const double s : {0.99e-4, 1.01e-4}) {
    const double direct = std::sin(s) / s / std::sqrt(std::numbers::pi);
    CHECK(std::abs(analytic_energy_rep(1.0, s)) == doctest::Approx(direct).epsilon(1e-14));
  }

  // Parseval: integral of |phi|^2 over S is 1 (trapezoid plus 1/(pi d L) tails).
  for (const double d : {0.5, 1.0, 2.0}) {
    const double lim = 2000.0, h = 0.004;
    const int steps = static_cast<int>(2 * lim / h);
    double sum = 0;
    for (int k = 0; k <= steps; ++k) {
      const double v = std::norm(analytic_energy_rep(d, -lim + k * h));
      sum += (k == 0 || k == steps) ? 0.5 * v : v;
    }
    const double total = sum * h + 1.0 / (std::numbers::pi * d * lim);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("numerical energy representation") {
  for (const double d : {1.0, 0.4}) {
    const auto g = TimeGrid::aligned(d, d, 4096);
    const auto spectrum = energy_representation(constrained_initial_state(d, g));
    REQUIRE(spectrum.size() == 4096);
    CHECK(spectral_error(spectrum, d) < 1e-3);

    std::size_t zero = 0;
    while (spectrum[zero].e_sum != 0.0) ++zero;
    CHECK(std::abs(spectrum[zero].phi) == doctest::Approx(std::sqrt(d / std::numbers::pi)).epsilon(1e-9));

    // phase -2 d E near the origin
    for (std::size_t k = 1; spectrum[zero + k].e_sum < std::numbers::pi / d; ++k) {
      const auto& s = spectrum[zero + k];
      CHECK(std::abs(std::arg(s.phi * std::polar(1.0, 2 * d * s.e_sum))) < 1e-9);
    }

    const double de = spectrum[1].e_sum - spectrum[0].e_sum;
    const double peak = std::abs(spectrum[zero].phi);
    for (int k = 1; k <= 4; ++k) {
      const double target = k * std::numbers::pi / d;
      const auto c = zero + static_cast<std::size_t>(std::lround(target / de));
      std::size_t best = c;
      for (std::size_t j = c - 2; j <= c + 2; ++j)
        if (std::abs(spectrum[j].phi) < std::abs(spectrum[best].phi)) best = j;
      CHECK(std::abs(spectrum[best].e_sum - target) <= de);
      CHECK(std::abs(spectrum[best].phi) < 1e-3 * peak);
    }
  }
}

TEST_CASE("energy representation converges under refinement on unaligned grids") {
  const double d = 1.0;
  const auto err = [&](int n) {
    const auto g = TimeGrid::spanning(-d, 5 * d, n);
    return spectral_error(energy_representation(constrained_initial_state(d, g)), d);
  };
  const double e1024 = err(1024), e4096 = err(4096);
  MESSAGE("unaligned rel L2: n=1024 " << e1024 << ", n=4096 " << e4096);
  CHECK(e4096 < e1024);
}

TEST_CASE("energy representation rejects non-diagonal states") {
  const auto g = TimeGrid::aligned(1.0, 1.0, 256);
  ProjectionParams p;
  p.beta = 0.5;
  p.t_0 = 2.0;
  const auto s = project_bob(constrained_initial_state(1.0, g), p);
  CHECK_THROWS_AS(energy_representation(s), collapse::UnsupportedStateError);
}

TEST_CASE("project_bob limits and coefficients") {
  const double d = 1.0;
  const auto g = TimeGrid::aligned(d, d, 1024);
  const auto init = constrained_initial_state(d, g);
  ProjectionParams p;
  p.t_0 = 2.0;
  p.E_0 = 0.4;

  p.beta = 0.0;
  const auto s0 = project_bob(init, p);
  REQUIRE(s0.branches().size() == 1);
  CHECK(s0.branches()[0].role == BranchRole::Delta);
  const auto& delta = std::get<Product>(s0.branches()[0].shape);
  const int c = g.cell_of(2.0);
  CHECK(std::abs(delta.f_a[c]) == doctest::Approx(1 / std::sqrt(g.dt())));
  CHECK(std::abs(delta.f_b[c]) == doctest::Approx(1 / std::sqrt(g.dt())));
  CHECK(*s0.delta_center == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(time_marginal_variance(s0) <= g.dt() * g.dt());

  p.beta = 1.0;
  const auto s1 = project_bob(init, p);
  REQUIRE(s1.branches().size() == 1);
  CHECK(s1.branches()[0].role == BranchRole::Window);
  CHECK(time_marginal_variance(s1) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));

  p.beta = 0.5;
  const auto s5 = project_bob(init, p);
  REQUIRE(s5.branches().size() == 2);
  const double a = s5.branches()[0].raw_weight.real(), b = s5.branches()[1].raw_weight.real();
  CHECK(a == 0.75);
  CHECK(b == 0.25);
  CHECK(a + b == 1.0);
  CHECK(s5.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // Squared weights do not sum to one; the raw norm records it.
  const double span = g.span();
  MESSAGE("beta=0.5 norm_raw = " << s5.norm_raw() << " vs A^2 + B^2 L = " << a * a + b * b * span);
  CHECK(std::abs(s5.norm_raw() - 1.0) > 1e-3);
  CHECK(s5.norm_raw() == doctest::Approx(a * a + b * b * span).epsilon(1e-3));
  CHECK(s5.warnings.empty());
}

TEST_CASE("projected state agrees with the dense oracle") {
  const double d = 1.0;
  const auto g = TimeGrid::aligned(d, d, 256);
  const auto init = constrained_initial_state(d, g);
  for (const double beta : {0.0, 0.3, 0.5, 0.9, 1.0}) {
    ProjectionParams p;
    p.beta = beta;
    p.t_0 = 2.3;
    p.E_0 = 1.7;
    const auto s = project_bob(init, p);
    const auto dense = dense_projected(g, s.window(), beta, p.t_0, p.E_0);
    CHECK(s.norm_raw() == doctest::Approx(dense.norm()).epsilon(1e-12));
    const auto da = dense.marginal(Axis::A), db = dense.marginal(Axis::B);
    const auto ma = marginal(s, Axis::A), mb = marginal(s, Axis::B);
    const double z = dense.norm();
    for (int i = 0; i < g.n(); ++i) {
      REQUIRE(ma[i] == doctest::Approx(da[i] / z).epsilon(1e-10));
      REQUIRE(mb[i] == doctest::Approx(db[i] / z).epsilon(1e-10));
    }
    CHECK(time_marginal_variance(s) == doctest::Approx(variance_of(da, g)).epsilon(1e-10));
  }
}

TEST_CASE("project_bob parameter handling") {
  const auto g = TimeGrid::aligned(1.0, 1.0, 512);
  const auto init = constrained_initial_state(1.0, g);
  ProjectionParams p;
  p.beta = 0.5;
  p.t_0 = 0.2;  // inside the grid, outside the window
  const auto s = project_bob(init, p);
  CHECK(s.warnings.size() == 1);
  CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-12));

  p.t_0 = 100.0;
  CHECK_THROWS_AS(project_bob(init, p), collapse::ParameterError);
  p.t_0 = 2.0;
  p.epsilon = 3 * g.dt();
  CHECK_THROWS_AS(project_bob(init, p), collapse::ParameterError);
  p.epsilon = 0.0;
  CHECK_THROWS_AS(project_bob(init, p), collapse::ParameterError);
  p.epsilon.reset();
  p.beta = 1.5;
  CHECK_THROWS_AS(project_bob(init, p), collapse::DomainError);
  p.beta = 0.5;
  CHECK_THROWS_AS(project_bob(project_bob(init, p), p), collapse::UnsupportedStateError);
}

TEST_CASE("Gaussian delta regularization") {
  const auto g = TimeGrid::aligned(1.0, 1.0, 1024);
  const auto init = constrained_initial_state(1.0, g);
  ProjectionParams p;
  p.beta = 0.0;
  p.t_0 = 2.0;
  p.mode = DeltaMode::Gaussian;
  p.epsilon = 1.5 * g.dt();
  const auto s = project_bob(init, p);
  CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // |delta_eps|^2 has standard deviation epsilon in each coordinate.
  CHECK(std::sqrt(time_marginal_variance(s)) == doctest::Approx(*p.epsilon).epsilon(0.05));
  CHECK(time_marginal_variance(s) <= std::pow(*p.epsilon, 2) * 1.1);
}

TEST_CASE("branch probabilities") {
  const auto g = TimeGrid::aligned(1.0, 1.0, 2048);
  const auto init = constrained_initial_state(1.0, g);
  ProjectionParams p;
  p.t_0 = 2.0;
  for (const double beta : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    p.beta = beta;
    const auto s = project_bob(init, p);
    const double pd = branch_probability(s, BranchRole::Delta);
    const double pw = branch_probability(s, BranchRole::Window);
    CHECK(pd + pw == doctest::Approx(1.0).epsilon(1e-12));
    const double a = 1 - beta * beta, b = beta * beta;
    CHECK(pw == doctest::Approx(b * b * g.span() / s.norm_raw()).epsilon(1e-12));
    CHECK(pd == doctest::Approx(a * a / s.norm_raw()).epsilon(1e-3));
  }
}

TEST_CASE("sigma_t_paper") {
  CHECK(sigma_t_paper(0.0, 1.0) == 0.0);
  CHECK(sigma_t_paper(1.0, 1.0) == 2.0);
  CHECK(sigma_t_paper(0.5, 1.0) == 1.0);
  CHECK_THROWS_AS(sigma_t_paper(1.1, 1.0), collapse::DomainError);
  CHECK_THROWS_AS(sigma_t_paper(0.5, 0.0), collapse::DomainError);
  double prev = -1;
  for (int k = 0; k <= 50; ++k) {
    const double v = sigma_t_paper(k / 50.0, 2.0);
    CHECK(v > prev);
    if (k > 0) CHECK(sigma_t_paper(k / 50.0, 3.0) > v);
    prev = v;
  }
}

TEST_CASE("CSV dumps") {
  const auto g = TimeGrid::aligned(1.0, 1.0, 64);
  ProjectionParams p;
  p.beta = 1.0;
  p.t_0 = 2.0;
  const auto s = project_bob(constrained_initial_state(1.0, g), p);
  const auto prof = profiles_csv(s);
  CHECK(prof.rfind("branch,kind,t,re,im\n", 0) == 0);
  CHECK(prof.find("0,product_a,") != std::string::npos);
  const auto marg = marginals_csv(s);
  CHECK(marg.rfind("marginal,t,prob\n", 0) == 0);
  CHECK(std::count(marg.begin(), marg.end(), '\n') == 1 + 2 * 64);
}
