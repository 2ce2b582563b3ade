#include "collapse/kinematics.hpp"

#include <cmath>
#include <string>

#include "collapse/errors.hpp"
#include "collapse/format.hpp"

namespace collapse::kinematics {

namespace {

void require_positive_length(double d, const char* what) {
  if (!(std::isfinite(d) && d > 0.0)) {
    throw DomainError(std::string(what) + " must be a finite length > 0, got " + num(d));
  }
}

}  // namespace

Velocity::Velocity(double beta) : beta_(beta) {
  if (!(std::isfinite(beta) && beta >= 0.0 && beta < 1.0)) {
    throw DomainError("beta must lie in [0, 1), got " + num(beta));
  }
}

// (1-b)(1+b) keeps precision as beta -> 1.
double Velocity::gamma() const noexcept { return 1.0 / std::sqrt((1.0 - beta_) * (1.0 + beta_)); }

double gamma(Velocity v) { return v.gamma(); }
double gamma(double beta) { return Velocity(beta).gamma(); }

std::string_view to_string(Frame f) { return f == Frame::Lab ? "Lab" : "Bob"; }

Interval boost_interval(double delta_t, double delta_x, Velocity v) {
  const double g = v.gamma();
  const double b = v.beta();
  return {g * (delta_t - b * delta_x), g * (delta_x - b * delta_t)};
}

Interval unboost_interval(double delta_t_prime, double delta_x_prime, Velocity v) {
  const double g = v.gamma();
  const double b = v.beta();
  return {g * (delta_t_prime + b * delta_x_prime), g * (delta_x_prime + b * delta_t_prime)};
}

bool paradox_condition(double delta_t, double d, Velocity v) {
  return v.beta() * (2.0 * d) > delta_t;
}

EmissionWindow emission_window(double d, Velocity v) {
  require_positive_length(d, "d");
  const double b = v.beta();
  if (b == 0.0) {
    throw DomainError("emission window diverges for beta = 0");
  }
  const double t_min = d * (1.0 / b - 1.0);
  const double t_max = d * (1.0 / b + 1.0);
  // The difference t_max - t_min carries round-off of order d/beta; the
  // width itself is exactly 2d.
  return {t_min, t_max, 2.0 * d};
}

ExperimentConfig ExperimentConfig::make(double d, double beta, double t_e) {
  require_positive_length(d, "d");
  Velocity v(beta);
  if (beta == 0.0) {
    throw DomainError("scenario requires beta > 0 (Bob never leaves the source at beta = 0)");
  }
  if (!(std::isfinite(t_e) && t_e >= 0.0)) {
    throw DomainError("t_e must be finite and >= 0, got " + num(t_e));
  }
  return ExperimentConfig{d, v, t_e, 4096, std::nullopt, std::nullopt};
}

MeasurementEvents measurement_events(const ExperimentConfig& cfg) {
  const double b = cfg.beta();
  const double t_b = cfg.t_e / (1.0 - b);
  return {
      SpacetimeEvent{-cfg.d, cfg.t_e + cfg.d, Frame::Lab},
      SpacetimeEvent{b * t_b, t_b, Frame::Lab},
  };
}

double delta_t_paper_model(double delta_t, double d, Velocity v) {
  const double b = v.beta();
  return v.gamma() * (delta_t * (1.0 - b * b) - 2.0 * b * d);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::BobFirstBoth:
      return "BobFirstBoth";
    case Regime::Paradox:
      return "Paradox";
    case Regime::AliceFirstBoth:
      return "AliceFirstBoth";
    case Regime::Boundary:
      return "Boundary";
  }
  return "Boundary";
}

OrderingReport classify_ordering(const ExperimentConfig& cfg, double tol) {
  if (!(tol > 0.0)) {
    throw ParameterError("simultaneity tolerance must be > 0");
  }
  const auto [alice, bob] = measurement_events(cfg);
  const double dt_lab = bob.t - alice.t;
  const double dx_lab = bob.x - alice.x;
  const double dt_exact = boost_interval(dt_lab, dx_lab, cfg.velocity).dt;
  const double dt_paper = delta_t_paper_model(dt_lab, cfg.d, cfg.velocity);

  Regime regime = Regime::Boundary;
  if (dt_lab > tol && dt_exact < -tol) {
    regime = Regime::Paradox;
  } else if (dt_lab < -tol && dt_exact < -tol) {
    regime = Regime::BobFirstBoth;
  } else if (dt_lab > tol && dt_exact > tol) {
    regime = Regime::AliceFirstBoth;
  }
  return {dt_lab, dt_exact, dt_paper, regime};
}

OrderingReport classify_ordering(const ExperimentConfig& cfg) {
  return classify_ordering(cfg, cfg.effective_tol());
}

std::vector<DiagramPoint> worldline_diagram(const ExperimentConfig& cfg, double t_max) {
  const auto [alice, bob] = measurement_events(cfg);
  if (!(t_max > alice.t && t_max > bob.t)) {
    throw RangeError("t_max = " + num(t_max) + " must exceed both measurement times (" +
                     num(alice.t) + ", " + num(bob.t) + ")");
  }
  const double b = cfg.beta();
  const double d = cfg.d;
  const double te = cfg.t_e;
  return {
      {"alice", "start", -d, 0.0},
      {"alice", "end", -d, t_max},
      {"bob", "start", 0.0, 0.0},
      {"bob", "end", b * t_max, t_max},
      {"source", "start", 0.0, 0.0},
      {"source", "end", 0.0, t_max},
      {"photon_left", "emission", 0.0, te},
      {"photon_left", "detection", alice.x, alice.t},
      {"photon_right", "emission", 0.0, te},
      {"photon_right", "detection", bob.x, bob.t},
      {"event", "alice_measurement", alice.x, alice.t},
      {"event", "bob_measurement", bob.x, bob.t},
  };
}

std::string diagram_csv(const std::vector<DiagramPoint>& points) {
  std::string out = "series,label,x,t\n";
  for (const auto& p : points) {
    out += p.series + ',' + p.label + ',' + num(p.x) + ',' + num(p.t) + '\n';
  }
  return out;
}

}  // namespace collapse::kinematics
