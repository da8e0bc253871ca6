#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cavityseed/model.hpp"
#include "cavityseed/rng.hpp"

namespace cavityseed {

enum class Scheme { euler_maruyama, split_exponential };

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);

// Euler-Maruyama on the stiff field equation is unstable beyond this.
inline constexpr double kMaxEulerKappaDt = 0.1;

struct IntegratorConfig {
  Scheme scheme = Scheme::split_exponential;
  int record_stride = 100;
  double t_end = 1.0;
  // Full position snapshots are stored at these instants only. They also
  // act as step breakpoints so that they are hit exactly.
  std::vector<double> snapshot_times;

  // Test controls: hold the atoms (x, p) or the field alpha fixed.
  bool freeze_atoms = false;
  bool freeze_field = false;

  void validate(const SimParams& params) const;

  friend bool operator==(const IntegratorConfig&,
                         const IntegratorConfig&) = default;
};

struct PositionSnapshot {
  double t = 0.0;
  std::vector<double> x;
};

struct TrajectoryRun {
  std::vector<ObservableRecord> records;
  std::vector<PositionSnapshot> snapshots;
  TrajectoryState final_state;
};

/// Thermal initial state: uniform positions, Maxwell-Boltzmann momenta with
/// variance m * k_B T, empty cavity.
TrajectoryState sample_initial(const SimParams& params, RandomSource& source);
TrajectoryState sample_initial(const SimParams& params, const RngStream& rng);

/// One integration step. Atoms follow a velocity-Verlet (kick-drift-kick)
/// update in the instantaneous field; the field follows either an
/// Euler-Maruyama step driven by the pre-step atoms or the exact
/// Ornstein-Uhlenbeck update for atoms frozen at their step-averaged sums.
///
/// sin/cos of the positions are cached between calls, so the state must not
/// be modified by anyone else between two advance() calls.
class Stepper {
 public:
  Stepper(const SimParams& params, const IntegratorConfig& cfg);

  void advance(TrajectoryState& state, Complex eta_p, double dt,
               RandomSource& noise);

 private:
  void refresh(const TrajectoryState& state);
  void kick(TrajectoryState& state, double half_dt) const;

  const SimParams& params_;
  const IntegratorConfig& cfg_;
  std::vector<double> sin_x_;
  std::vector<double> cos_x_;
  double sum_sin_ = 0.0;
  double sum_sin2_ = 0.0;
  bool cached_ = false;
};

/// Advances the state by dt in place. Draws exactly two gaussians from
/// `noise` per step when noise is on (real part first).
void step(TrajectoryState& state, Complex eta_p, const SimParams& params,
          const IntegratorConfig& cfg, double dt, RandomSource& noise);

/// Integrates from initial.t to cfg.t_end. Steps are shortened so that pump
/// switch times, snapshot times and t_end are hit exactly. `noise` is
/// advanced, so a follow-up call continues the same realisation.
TrajectoryRun run_trajectory(const SimParams& params,
                             const PumpSchedule& schedule,
                             const IntegratorConfig& cfg, RandomSource& noise,
                             TrajectoryState initial);

TrajectoryRun run_trajectory(const SimParams& params,
                             const PumpSchedule& schedule,
                             const IntegratorConfig& cfg, const RngStream& rng,
                             std::optional<TrajectoryState> initial = {});

}  // namespace cavityseed
