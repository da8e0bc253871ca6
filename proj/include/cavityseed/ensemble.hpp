#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cavityseed/integrator.hpp"

namespace cavityseed {

/// n_init initial conditions times n_noise noise realisations. Trajectory
/// (i, j) uses RngStream{master_seed, i, j}.
struct EnsembleSpec {
  int n_init = 1;
  int n_noise = 1;
  std::uint64_t master_seed = 0;
  // When set, a trajectory whose theta is negative at this time is replaced
  // by its parity partner (mirrored initial state and noise), so every member
  // holds the even pattern there. Requires eta_p = 0 before this time.
  std::optional<double> even_pattern_at;

  void validate() const;
  std::size_t size() const {
    return static_cast<std::size_t>(n_init) * static_cast<std::size_t>(n_noise);
  }

  friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

struct EnsembleOptions {
  int workers = 0;  // 0: one per hardware thread
  // Mirror every initial state (x -> -x, p -> -p, alpha -> -alpha) and negate
  // the cavity input noise. With eta_p = 0 this maps each trajectory onto its
  // parity partner.
  bool mirrored = false;
};

struct TrajectoryResult {
  int init_index = 0;
  int noise_index = 0;
  std::vector<ObservableRecord> records;
  std::vector<PositionSnapshot> snapshots;
};

/// Ensemble statistics at one recorded instant.
struct AggregatePoint {
  double t = 0.0;
  double theta_mean = 0.0;
  double theta_std = 0.0;
  double bunching_mean = 0.0;
  double bunching_std = 0.0;
  double photon_number_mean = 0.0;
  double odd_fraction = 0.0;

  friend bool operator==(const AggregatePoint&, const AggregatePoint&) = default;
};

struct EnsembleResult {
  EnsembleSpec spec;
  // Row-major over (init_index, noise_index).
  std::vector<TrajectoryResult> trajectories;
  std::vector<AggregatePoint> aggregate;

  std::vector<double> record_times() const;
  std::vector<double> final_theta() const;
  std::vector<double> final_bunching() const;
};

struct Histogram {
  std::vector<double> bin_centers;
  std::vector<double> density;  // integrates to one over [0, 2pi)
};

/// Mirror image of a state under x -> -x (wrapped), p -> -p, alpha -> -alpha.
TrajectoryState mirror(const TrajectoryState& state);

/// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> values);

EnsembleResult run_ensemble(const SimParams& params,
                            const PumpSchedule& schedule,
                            const IntegratorConfig& cfg,
                            const EnsembleSpec& spec,
                            const EnsembleOptions& options = {});

/// Recomputes result.aggregate from the trajectories.
void compute_aggregates(EnsembleResult& result);

/// Index of the record at time t (shared by all trajectories); throws
/// std::invalid_argument if t was not recorded.
std::size_t record_index(const EnsembleResult& result, double t);

/// Fraction of trajectories with theta strictly below zero at a recorded
/// instant.
double odd_fraction(const EnsembleResult& result, double at_time);

Histogram position_histogram(const EnsembleResult& result, double at_time,
                             int n_bins);

}  // namespace cavityseed
