#pragma once

// Special-relativistic geometry of the two-detector experiment, natural
// units (c = 1). Alice sits at x = -d, the biphoton source at x = 0, and Bob
// moves with velocity beta, passing the source at t = 0.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collapse::kinematics {

/// Dimensionless speed beta = v/c in [0, 1).
class Velocity {
 public:
  /// Throws DomainError unless 0 <= beta < 1 and finite.
  explicit Velocity(double beta);

  double beta() const noexcept { return beta_; }
  double gamma() const noexcept;

 private:
  double beta_;
};

double gamma(Velocity v);
/// Convenience overload; validates beta.
double gamma(double beta);

enum class Frame { Lab, Bob };
std::string_view to_string(Frame f);

struct SpacetimeEvent {
  double x;
  double t;
  Frame frame;
};

struct Interval {
  double dt;
  double dx;
};

/// Boost of a separation into the frame moving with +beta.
Interval boost_interval(double delta_t, double delta_x, Velocity v);
/// Algebraic inverse of boost_interval (boost by -beta).
Interval unboost_interval(double delta_t_prime, double delta_x_prime, Velocity v);

/// True iff beta * 2d > delta_t, i.e. the naive boost reverses the order.
bool paradox_condition(double delta_t, double d, Velocity v);

struct EmissionWindow {
  double t_e_min;
  double t_e_max;
  double width;
};

/// Emission times for which the lab and Bob orderings disagree.
/// Throws DomainError for beta = 0 (window diverges) or d <= 0.
EmissionWindow emission_window(double d, Velocity v);

struct ExperimentConfig {
  double d;
  Velocity velocity;
  double t_e;

  // Numerical controls.
  int grid_n = 4096;
  std::optional<double> window_start;  // defaults to d
  std::optional<double> tol;           // defaults to 1e-9 * 2d

  /// Validates d > 0, 0 < beta < 1, t_e >= 0 (finite) and grid_n.
  static ExperimentConfig make(double d, double beta, double t_e);

  double beta() const noexcept { return velocity.beta(); }
  double effective_window_start() const noexcept { return window_start.value_or(d); }
  double effective_tol() const noexcept { return tol.value_or(default_tolerance(d)); }

  static double default_tolerance(double d) noexcept { return 1e-9 * 2.0 * d; }
};

struct MeasurementEvents {
  SpacetimeEvent alice;
  SpacetimeEvent bob;
};

/// Alice detects at (-d, t_e + d); Bob where the right-moving photon
/// x = t - t_e meets his worldline x = beta t.
MeasurementEvents measurement_events(const ExperimentConfig& cfg);

/// The boosted difference gamma (dt (1 - beta^2) - 2 beta d), which assumes
/// the separation dx = 2d + beta dt.
double delta_t_paper_model(double delta_t, double d, Velocity v);

enum class Regime { BobFirstBoth, Paradox, AliceFirstBoth, Boundary };
std::string_view to_string(Regime r);

struct OrderingReport {
  double delta_t_lab;        // t_B - t_A
  double delta_t_bob_exact;  // boosted with the actual separation
  double delta_t_bob_paper;  // delta_t_paper_model(delta_t_lab, d, beta)
  Regime regime;
};

OrderingReport classify_ordering(const ExperimentConfig& cfg, double tol);
OrderingReport classify_ordering(const ExperimentConfig& cfg);

struct DiagramPoint {
  std::string series;
  std::string label;
  double x;
  double t;
};

/// Labeled polylines (alice, bob, source, photon_left, photon_right) plus
/// the two measurement markers (series "event"). Throws RangeError unless
/// t_max exceeds both measurement times.
std::vector<DiagramPoint> worldline_diagram(const ExperimentConfig& cfg, double t_max);

/// CSV `series,label,x,t` with 17 significant digits.
std::string diagram_csv(const std::vector<DiagramPoint>& points);

}  // namespace collapse::kinematics
