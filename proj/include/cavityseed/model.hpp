#pragma once

// Semiclassical model of N atoms coupled to one damped cavity mode.
//
// Units: hbar = k = omega_R = 1, so the atomic mass is 1/2. Positions are in
// 1/k, momenta in hbar*k, energies in E_R = hbar*omega_R, times in 1/omega_R.

#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cavityseed {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kAtomMass = 0.5;
inline constexpr double kInverseMass = 1.0 / kAtomMass;

// Below this thermal energy (in E_R) the semiclassical description is
// questionable; validation only warns.
inline constexpr double kSemiclassicalTempFloor = 10.0;

/// Thrown for malformed or out-of-range model / run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the integration itself fails (non-finite state etc).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimParams {
  int n_atoms = 1000;
  double eta = 0.0;        // transverse pump per atom
  double u0 = 0.0;         // light shift per photon, <= 0
  double kappa = 100.0;    // cavity field decay rate
  double delta_c = 0.0;    // pump-cavity detuning
  double temp_init = 200.0;
  double dt = 1e-2;
  bool noise_on = true;

  /// Throws ConfigError on a violated invariant. Returns warnings that do
  /// not invalidate the parameters.
  std::vector<std::string> validate() const;

  double collective_u0() const { return n_atoms * u0; }
};

/// Piecewise-constant longitudinal drive, right-continuous at switch times.
class PumpSchedule {
 public:
  struct Segment {
    double t_start = 0.0;
    Complex eta_p;

    friend bool operator==(const Segment&, const Segment&) = default;
  };

  PumpSchedule() : segments_{{0.0, Complex{}}} {}
  explicit PumpSchedule(Complex constant) : segments_{{0.0, constant}} {}
  explicit PumpSchedule(std::vector<Segment> segments);

  Complex at(double t) const;
  std::span<const Segment> segments() const { return segments_; }
  /// First switch time strictly after t, or +inf.
  double next_switch_after(double t) const;

  friend bool operator==(const PumpSchedule&, const PumpSchedule&) = default;

 private:
  std::vector<Segment> segments_;
};

struct TrajectoryState {
  std::vector<double> x;  // wrapped into [0, 2pi)
  std::vector<double> p;
  Complex alpha;
  double t = 0.0;

  std::size_t size() const { return x.size(); }
  bool is_finite() const;
};

struct ObservableRecord {
  double t = 0.0;
  double theta = 0.0;
  double bunching = 0.0;
  double photon_number = 0.0;
  double re_alpha = 0.0;
  double im_alpha = 0.0;

  static ObservableRecord of(const TrajectoryState& state);

  friend bool operator==(const ObservableRecord&,
                         const ObservableRecord&) = default;
};

/// Wraps a coordinate into [0, 2pi).
double wrap_position(double x);

/// Single-particle optical potential U(x, alpha).
double potential(double x, Complex alpha, const SimParams& params);

/// -dU/dx.
double force(double x, Complex alpha, const SimParams& params);

double order_parameter(std::span<const double> x);
double bunching(std::span<const double> x);

double effective_detuning(double bunching, const SimParams& params);

/// Noise-free stationary cavity field for a frozen atomic configuration
/// characterised by (theta, bunching).
Complex steady_state_field(double theta, double bunching, Complex eta_p,
                           const SimParams& params);

/// Linear drift of the field equation, d(alpha)/dt = rate * alpha + source.
struct FieldDrift {
  Complex rate;
  Complex source;

  Complex operator()(Complex alpha) const { return rate * alpha + source; }
};

/// Drift from the sums S1 = sum sin(x_j) and S2 = sum sin^2(x_j).
FieldDrift field_drift_from_sums(double sum_sin, double sum_sin2,
                                 Complex eta_p, const SimParams& params);

FieldDrift field_drift(const TrajectoryState& state, Complex eta_p,
                       const SimParams& params);

/// Total mechanical energy of the atoms in a fixed field.
double mechanical_energy(const TrajectoryState& state, const SimParams& params);

}  // namespace cavityseed
