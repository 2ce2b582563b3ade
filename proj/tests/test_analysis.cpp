#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "collapse/analysis.hpp"
#include "collapse/errors.hpp"

using namespace collapse::analysis;
using collapse::kinematics::ExperimentConfig;
using collapse::kinematics::Regime;
using collapse::kinematics::Velocity;

TEST_CASE("resolve examples") {
  auto r = resolve(1.0, 1.0, Velocity(0.0));
  CHECK(r.upper == 1.0);
  CHECK(r.sigma_t == 0.0);
  CHECK(r.lower == 1.0);

  // gamma * 0.75 = sqrt(0.75)
  r = resolve(1.0, 1.0, Velocity(0.5));
  CHECK(r.upper == doctest::Approx(0.86602540378443865).epsilon(1e-14));
  CHECK(r.sigma_t == 1.0);
  CHECK(r.sigma_t_prime == doctest::Approx(1.1547005383792515).epsilon(1e-14));
  CHECK(r.lower == doctest::Approx(-0.28867513459481287 - 1.1547005383792515).epsilon(1e-14));
  CHECK(r.identity_residual < 1e-15);

  CHECK_THROWS_AS(resolve(0.0, 1.0, Velocity(0.5)), collapse::DomainError);
  CHECK_THROWS_AS(resolve(-1.0, 1.0, Velocity(0.5)), collapse::DomainError);
  CHECK_THROWS_AS(resolve(1.0, 0.0, Velocity(0.5)), collapse::DomainError);
}

TEST_CASE("resolution identity and band ordering over random inputs") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const double dt = 1e-4 + 20 * u(gen), d = 0.01 + 10 * u(gen);
    const Velocity v(0.999 * u(gen));
    const auto r = resolve(dt, d, v);
    REQUIRE(r.upper > 0.0);
    REQUIRE(std::abs(r.upper - dt * std::sqrt(1 - v.beta() * v.beta())) <= 1e-9 * std::max(1.0, v.gamma() * dt));
    REQUIRE(r.identity_residual <= 1e-9 * std::max(1.0, v.gamma() * dt));
    REQUIRE(r.lower <= r.delta_t_prime);
    REQUIRE(r.delta_t_prime <= r.upper);
  }
}

TEST_CASE("upper decreases strictly with beta") {
  for (const double dt : {0.1, 1.0, 7.0}) {
    double prev = INFINITY;
    for (int k = 0; k < 100; ++k) {
      const double up = resolve(dt, 1.0, Velocity(k / 100.0)).upper;
      CHECK(up < prev);
      prev = up;
    }
  }
}

TEST_CASE("full_report in the paradox regime") {
  const auto r = full_report(ExperimentConfig::make(1.0, 0.5, 2.0));
  CHECK(r.ordering.regime == Regime::Paradox);
  CHECK(r.in_window);
  CHECK(r.ordering.delta_t_lab == 1.0);
  CHECK(r.resolution.upper == doctest::Approx(std::sqrt(0.75)).epsilon(1e-14));
  CHECK(r.resolution.straddles_zero());
  CHECK(r.verdict() == "ordering indeterminate within uncertainty");
  CHECK(r.sigma_t_paper == 1.0);
  CHECK(r.norm_raw != doctest::Approx(1.0));
  CHECK(r.var_tA_numeric > 0.0);
  CHECK(r.warnings.empty());
}

TEST_CASE("full_report outside the window") {
  const auto early = full_report(ExperimentConfig::make(1.0, 0.5, 0.5));
  CHECK(early.ordering.regime == Regime::BobFirstBoth);
  CHECK_FALSE(early.in_window);
  // resolution uses |dt_lab| = 0.5
  CHECK(early.resolution.upper == doctest::Approx(0.5 * std::sqrt(0.75)).epsilon(1e-14));
  CHECK_FALSE(early.warnings.empty());

  const auto late = full_report(ExperimentConfig::make(1.0, 0.5, 3.5));
  CHECK(late.ordering.regime == Regime::AliceFirstBoth);

  const auto edge = full_report(ExperimentConfig::make(1.0, 0.5, 1.0));
  CHECK(edge.ordering.regime == Regime::Boundary);
  CHECK(std::isfinite(edge.resolution.upper));
}

TEST_CASE("band straddles zero whenever the paradox condition holds") {
  std::mt19937_64 gen(88);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int paradoxes = 0;
  for (int i = 0; i < 2000; ++i) {
    const double d = 0.1 + 5 * u(gen), beta = 0.02 + 0.96 * u(gen);
    const auto cfg = ExperimentConfig::make(d, beta, 6 * d / beta * u(gen));
    const auto r = full_report(cfg);
    const double dt = std::abs(r.ordering.delta_t_lab);
    if (dt > 0.0 && collapse::kinematics::paradox_condition(dt, d, cfg.velocity)) {
      ++paradoxes;
      REQUIRE(r.resolution.straddles_zero());
    }
  }
  CHECK(paradoxes > 100);
}

TEST_CASE("report CSV") {
  CHECK(report_csv_header() ==
        "d,beta,t_e,dt_lab,dt_bob_exact,dt_bob_paper,regime,sigma_t_paper,var_tA_numeric,upper,lower,norm_raw");
  const auto row = report_csv_row(full_report(ExperimentConfig::make(1.0, 0.5, 2.0)));
  CHECK(row.rfind("1,0.5,2,1,", 0) == 0);
  CHECK(row.find(",Paradox,") != std::string::npos);
  CHECK(std::count(row.begin(), row.end(), ',') == 11);
}

TEST_CASE("projection override reaches the beta = 1 limit") {
  ReportOptions opts;
  opts.projection_beta = 1.0;
  const auto r = full_report(ExperimentConfig::make(1.0, 0.5, 2.0), opts);
  CHECK(r.var_tA_numeric == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  CHECK(r.sigma_t_paper == 2.0);
}
