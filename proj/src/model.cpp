#include "cavityseed/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cavityseed {

std::vector<std::string> SimParams::validate() const {
  if (n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw ConfigError("kappa must be a positive finite number");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ConfigError("dt must be a positive finite number");
  if (!(temp_init > 0.0) || !std::isfinite(temp_init))
    throw ConfigError("temp_init must be a positive finite number");
  if (!(u0 <= 0.0) || !std::isfinite(u0))
    throw ConfigError("u0 must be finite and <= 0");
  if (!std::isfinite(eta)) throw ConfigError("eta must be finite");
  if (!std::isfinite(delta_c)) throw ConfigError("delta_c must be finite");

  std::vector<std::string> warnings;
  if (temp_init <= kSemiclassicalTempFloor)
    warnings.emplace_back(
        "temp_init <= 10 E_R: semiclassical approximation may not hold");
  return warnings;
}

PumpSchedule::PumpSchedule(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw ConfigError("pump schedule has no segments");
  if (segments_.front().t_start != 0.0)
    throw ConfigError("pump schedule must start at t = 0");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!std::isfinite(s.t_start) || !std::isfinite(s.eta_p.real()) ||
        !std::isfinite(s.eta_p.imag()))
      throw ConfigError("pump schedule segment " + std::to_string(i) +
                        " is not finite");
    if (i > 0 && !(s.t_start > segments_[i - 1].t_start))
      throw ConfigError("pump schedule switch times must be strictly increasing");
  }
}

Complex PumpSchedule::at(double t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double value, const Segment& s) { return value < s.t_start; });
  if (it == segments_.begin()) return segments_.front().eta_p;
  return std::prev(it)->eta_p;
}

double PumpSchedule::next_switch_after(double t) const {
  for (const auto& s : segments_)
    if (s.t_start > t) return s.t_start;
  return std::numeric_limits<double>::infinity();
}

bool TrajectoryState::is_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(x.begin(), x.end(), finite) &&
         std::all_of(p.begin(), p.end(), finite) &&
         std::isfinite(alpha.real()) && std::isfinite(alpha.imag()) &&
         std::isfinite(t);
}

ObservableRecord ObservableRecord::of(const TrajectoryState& state) {
  ObservableRecord r;
  r.t = state.t;
  r.theta = order_parameter(state.x);
  r.bunching = cavityseed::bunching(state.x);
  r.re_alpha = state.alpha.real();
  r.im_alpha = state.alpha.imag();
  r.photon_number = std::norm(state.alpha);
  return r;
}

double wrap_position(double x) {
  double w = x - kTwoPi * std::floor(x / kTwoPi);
  // floor can leave w == 2pi (or a hair below 0) through rounding
  if (w >= kTwoPi) w -= kTwoPi;
  if (w < 0.0) w = 0.0;
  return w;
}

double potential(double x, Complex alpha, const SimParams& params) {
  const double s = std::sin(x);
  return params.u0 * std::norm(alpha) * s * s +
         2.0 * params.eta * alpha.real() * s;
}

double force(double x, Complex alpha, const SimParams& params) {
  return -params.u0 * std::norm(alpha) * std::sin(2.0 * x) -
         2.0 * params.eta * alpha.real() * std::cos(x);
}

double order_parameter(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("order_parameter: no atoms");
  double sum = 0.0;
  for (double xj : x) sum += std::sin(xj);
  return std::clamp(sum / static_cast<double>(x.size()), -1.0, 1.0);
}

double bunching(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("bunching: no atoms");
  double sum = 0.0;
  for (double xj : x) {
    const double s = std::sin(xj);
    sum += s * s;
  }
  return std::clamp(sum / static_cast<double>(x.size()), 0.0, 1.0);
}

double effective_detuning(double bunching, const SimParams& params) {
  return params.delta_c - params.collective_u0() * bunching;
}

Complex steady_state_field(double theta, double bunching, Complex eta_p,
                           const SimParams& params) {
  using namespace std::complex_literals;
  const double delta = effective_detuning(bunching, params);
  const Complex numerator = -1i * params.eta * (params.n_atoms * theta) + eta_p;
  return numerator / Complex{params.kappa, -delta};
}

FieldDrift field_drift_from_sums(double sum_sin, double sum_sin2,
                                 Complex eta_p, const SimParams& params) {
  return FieldDrift{
      Complex{-params.kappa, params.delta_c - params.u0 * sum_sin2},
      eta_p - Complex{0.0, params.eta * sum_sin},
  };
}

FieldDrift field_drift(const TrajectoryState& state, Complex eta_p,
                       const SimParams& params) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (double xj : state.x) {
    const double s = std::sin(xj);
    s1 += s;
    s2 += s * s;
  }
  return field_drift_from_sums(s1, s2, eta_p, params);
}

double mechanical_energy(const TrajectoryState& state,
                         const SimParams& params) {
  double e = 0.0;
  for (std::size_t j = 0; j < state.size(); ++j)
    e += state.p[j] * state.p[j] / (2.0 * kAtomMass) +
         potential(state.x[j], state.alpha, params);
  return e;
}

}  // namespace cavityseed
