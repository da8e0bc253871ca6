#include "cavityseed/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cavityseed {

namespace {

// e^z - 1 without cancellation for small |z|.
Complex expm1(Complex z) {
  const double a = z.real();
  const double b = z.imag();
  const double half_sin = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * half_sin * half_sin,
          std::exp(a) * std::sin(b)};
}

// Breakpoints strictly inside (t0, t_end], in increasing order.
std::vector<double> breakpoints(const PumpSchedule& schedule,
                                const IntegratorConfig& cfg, double t0) {
  std::vector<double> points{cfg.t_end};
  for (const auto& s : schedule.segments())
    if (s.t_start > t0 && s.t_start < cfg.t_end) points.push_back(s.t_start);
  for (double ts : cfg.snapshot_times)
    if (ts > t0 && ts < cfg.t_end) points.push_back(ts);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

bool is_snapshot_time(const IntegratorConfig& cfg, double t) {
  return std::find(cfg.snapshot_times.begin(), cfg.snapshot_times.end(), t) !=
         cfg.snapshot_times.end();
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::euler_maruyama:
      return "euler_maruyama";
    case Scheme::split_exponential:
      return "split_exponential";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "euler_maruyama") return Scheme::euler_maruyama;
  if (name == "split_exponential") return Scheme::split_exponential;
  throw ConfigError("unknown integrator scheme '" + std::string(name) + "'");
}

void IntegratorConfig::validate(const SimParams& params) const {
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw ConfigError("t_end must be a positive finite number");
  for (double ts : snapshot_times)
    if (!(ts >= 0.0) || ts > t_end)
      throw ConfigError("snapshot time outside [0, t_end]");
  if (scheme == Scheme::euler_maruyama &&
      params.kappa * params.dt > kMaxEulerKappaDt) {
    std::ostringstream msg;
    msg << "euler_maruyama requires kappa*dt <= " << kMaxEulerKappaDt
        << " (got " << params.kappa * params.dt << ")";
    throw ConfigError(msg.str());
  }
}

TrajectoryState sample_initial(const SimParams& params, RandomSource& source) {
  const auto n = static_cast<std::size_t>(params.n_atoms);
  const double sigma_p = std::sqrt(kAtomMass * params.temp_init);
  TrajectoryState state;
  state.x.resize(n);
  state.p.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    state.x[j] = wrap_position(source.uniform(0.0, kTwoPi));
  for (std::size_t j = 0; j < n; ++j) state.p[j] = source.gaussian(sigma_p);
  state.alpha = Complex{};
  state.t = 0.0;
  return state;
}

TrajectoryState sample_initial(const SimParams& params, const RngStream& rng) {
  auto source = rng.initial_state_source();
  return sample_initial(params, source);
}

Stepper::Stepper(const SimParams& params, const IntegratorConfig& cfg)
    : params_(params), cfg_(cfg) {}

void Stepper::refresh(const TrajectoryState& state) {
  const std::size_t n = state.size();
  sin_x_.resize(n);
  cos_x_.resize(n);
  sum_sin_ = 0.0;
  sum_sin2_ = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::sin(state.x[j]);
    sin_x_[j] = s;
    cos_x_[j] = std::cos(state.x[j]);
    sum_sin_ += s;
    sum_sin2_ += s * s;
  }
  cached_ = true;
}

void Stepper::kick(TrajectoryState& state, double half_dt) const {
  const double lattice = -2.0 * params_.u0 * std::norm(state.alpha);
  const double scatter = -2.0 * params_.eta * state.alpha.real();
  double* p = state.p.data();
  for (std::size_t j = 0; j < state.size(); ++j)
    p[j] += (lattice * sin_x_[j] + scatter) * cos_x_[j] * half_dt;
}

void Stepper::advance(TrajectoryState& state, Complex eta_p, double dt,
                      RandomSource& noise) {
  if (!cached_ || sin_x_.size() != state.size()) refresh(state);
  const Complex alpha = state.alpha;
  const double start_sin = sum_sin_;
  const double start_sin2 = sum_sin2_;

  if (!cfg_.freeze_atoms) {
    kick(state, 0.5 * dt);
    double* x = state.x.data();
    const double* p = state.p.data();
    for (std::size_t j = 0; j < state.size(); ++j) {
      double xj = x[j] + kInverseMass * p[j] * dt;
      if (xj >= kTwoPi) xj -= kTwoPi;
      else if (xj < 0.0) xj += kTwoPi;
      if (xj < 0.0 || xj >= kTwoPi) xj = wrap_position(xj);
      x[j] = xj;
    }
    refresh(state);
  }

  if (!cfg_.freeze_field) {
    double sigma = 0.0;
    if (cfg_.scheme == Scheme::euler_maruyama) {
      const FieldDrift drift =
          field_drift_from_sums(start_sin, start_sin2, eta_p, params_);
      state.alpha = alpha + drift(alpha) * dt;
      sigma = std::sqrt(0.5 * params_.kappa * dt);
    } else {
      // Exact propagation of the linear field equation with the atomic sums
      // taken as the average over the step.
      const FieldDrift drift = field_drift_from_sums(
          0.5 * (start_sin + sum_sin_), 0.5 * (start_sin2 + sum_sin2_), eta_p,
          params_);
      const Complex growth_m1 = expm1(drift.rate * dt);
      state.alpha =
          alpha + growth_m1 * alpha + growth_m1 / drift.rate * drift.source;
      sigma = 0.5 * std::sqrt(-std::expm1(-2.0 * params_.kappa * dt));
    }
    if (params_.noise_on) {
      const double re = noise.gaussian(sigma);
      const double im = noise.gaussian(sigma);
      state.alpha += Complex{re, im};
    }
  }

  if (!cfg_.freeze_atoms) kick(state, 0.5 * dt);

  state.t += dt;
  if (!std::isfinite(state.alpha.real()) || !std::isfinite(state.alpha.imag()) ||
      !std::isfinite(sum_sin_))
    throw IntegrationError("non-finite state at t = " + std::to_string(state.t));
}

void step(TrajectoryState& state, Complex eta_p, const SimParams& params,
          const IntegratorConfig& cfg, double dt, RandomSource& noise) {
  Stepper(params, cfg).advance(state, eta_p, dt, noise);
}

TrajectoryRun run_trajectory(const SimParams& params,
                             const PumpSchedule& schedule,
                             const IntegratorConfig& cfg, RandomSource& noise,
                             TrajectoryState initial) {
  cfg.validate(params);
  if (initial.x.size() != static_cast<std::size_t>(params.n_atoms) ||
      initial.p.size() != initial.x.size())
    throw ConfigError("initial state does not match n_atoms");
  if (!initial.is_finite()) throw IntegrationError("non-finite initial state");
  if (initial.t > cfg.t_end)
    throw ConfigError("initial state lies beyond t_end");

  TrajectoryRun run;
  run.final_state = std::move(initial);
  auto& state = run.final_state;
  const double dt = params.dt;
  Stepper stepper(params, cfg);

  const auto record = [&] {
    run.records.push_back(ObservableRecord::of(state));
    if (is_snapshot_time(cfg, state.t))
      run.snapshots.push_back({state.t, state.x});
  };

  record();
  double piece_start = state.t;
  for (double piece_end : breakpoints(schedule, cfg, piece_start)) {
    const Complex eta_p = schedule.at(piece_start);
    const auto n_steps = static_cast<long long>(
        std::ceil((piece_end - piece_start) / dt - 1e-9));
    for (long long k = 1; k <= n_steps; ++k) {
      const double t_prev = piece_start + static_cast<double>(k - 1) * dt;
      const double t_next =
          k == n_steps ? piece_end : piece_start + static_cast<double>(k) * dt;
      stepper.advance(state, eta_p, t_next - t_prev, noise);
      state.t = t_next;
      if (k == n_steps || k % cfg.record_stride == 0) record();
    }
    piece_start = piece_end;
  }
  return run;
}

TrajectoryRun run_trajectory(const SimParams& params,
                             const PumpSchedule& schedule,
                             const IntegratorConfig& cfg, const RngStream& rng,
                             std::optional<TrajectoryState> initial) {
  TrajectoryState start =
      initial ? std::move(*initial) : sample_initial(params, rng);
  auto noise = rng.noise_source();
  return run_trajectory(params, schedule, cfg, noise, std::move(start));
}

}  // namespace cavityseed
