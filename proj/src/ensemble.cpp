#include "cavityseed/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

namespace cavityseed {

namespace {

bool same_time(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

struct Failure {
  std::size_t index = 0;
  std::string message;
};

}  // namespace

void EnsembleSpec::validate() const {
  if (n_init < 1) throw ConfigError("ensemble n_init must be >= 1");
  if (n_noise < 1) throw ConfigError("ensemble n_noise must be >= 1");
}

std::vector<double> EnsembleResult::record_times() const {
  std::vector<double> times;
  if (trajectories.empty()) return times;
  for (const auto& r : trajectories.front().records) times.push_back(r.t);
  return times;
}

std::vector<double> EnsembleResult::final_theta() const {
  std::vector<double> out;
  out.reserve(trajectories.size());
  for (const auto& tr : trajectories) out.push_back(tr.records.back().theta);
  return out;
}

std::vector<double> EnsembleResult::final_bunching() const {
  std::vector<double> out;
  out.reserve(trajectories.size());
  for (const auto& tr : trajectories) out.push_back(tr.records.back().bunching);
  return out;
}

TrajectoryState mirror(const TrajectoryState& state) {
  TrajectoryState m = state;
  for (auto& x : m.x) x = wrap_position(-x);
  for (auto& p : m.p) p = -p;
  m.alpha = -state.alpha;
  return m;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EnsembleResult run_ensemble(const SimParams& params,
                            const PumpSchedule& schedule,
                            const IntegratorConfig& cfg,
                            const EnsembleSpec& spec,
                            const EnsembleOptions& options) {
  params.validate();
  cfg.validate(params);
  spec.validate();
  if (spec.even_pattern_at) {
    const double t_sel = *spec.even_pattern_at;
    if (!(t_sel > 0.0) || t_sel > cfg.t_end)
      throw ConfigError("ensemble.even_pattern_at must lie in (0, t_end]");
    for (const auto& seg : schedule.segments())
      if (seg.t_start < t_sel && seg.eta_p != Complex{})
        throw ConfigError("ensemble.even_pattern_at requires eta_p = 0 before it");
  }

  EnsembleResult result;
  result.spec = spec;
  result.trajectories.resize(spec.size());

  const auto run_one = [&](std::size_t index) {
    const auto i = static_cast<int>(index / static_cast<std::size_t>(spec.n_noise));
    const auto j = static_cast<int>(index % static_cast<std::size_t>(spec.n_noise));
    const RngStream rng{spec.master_seed, static_cast<std::uint64_t>(i),
                        static_cast<std::uint64_t>(j)};
    bool mirrored = options.mirrored;
    if (spec.even_pattern_at) {
      IntegratorConfig probe = cfg;
      probe.t_end = *spec.even_pattern_at;
      probe.snapshot_times.clear();
      probe.record_stride = std::numeric_limits<int>::max();
      TrajectoryState start = sample_initial(params, rng);
      if (mirrored) start = mirror(start);
      RandomSource probe_noise = rng.noise_source();
      probe_noise.set_mirrored(mirrored);
      const TrajectoryRun pre =
          run_trajectory(params, schedule, probe, probe_noise, std::move(start));
      if (pre.records.back().theta < 0.0) mirrored = !mirrored;
    }
    TrajectoryState initial = sample_initial(params, rng);
    if (mirrored) initial = mirror(initial);
    RandomSource noise = rng.noise_source();
    noise.set_mirrored(mirrored);
    TrajectoryRun run =
        run_trajectory(params, schedule, cfg, noise, std::move(initial));
    auto& out = result.trajectories[index];
    out.init_index = i;
    out.noise_index = j;
    out.records = std::move(run.records);
    out.snapshots = std::move(run.snapshots);
  };

  int workers = options.workers > 0
                    ? options.workers
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::size_t>(workers, spec.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex failure_mutex;
  std::optional<Failure> failure;

  const auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t index = next.fetch_add(1);
      if (index >= spec.size()) return;
      try {
        run_one(index);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure || index < failure->index)
          failure = Failure{index, e.what()};
        abort = true;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  if (failure) {
    const auto n_noise = static_cast<std::size_t>(spec.n_noise);
    throw IntegrationError("trajectory (" +
                           std::to_string(failure->index / n_noise) + ", " +
                           std::to_string(failure->index % n_noise) +
                           ") failed: " + failure->message);
  }

  compute_aggregates(result);
  return result;
}

void compute_aggregates(EnsembleResult& result) {
  result.aggregate.clear();
  if (result.trajectories.empty()) return;
  const std::size_t n_records = result.trajectories.front().records.size();
  for (const auto& tr : result.trajectories)
    if (tr.records.size() != n_records)
      throw IntegrationError("trajectories recorded different time grids");

  const std::size_t m = result.trajectories.size();
  const auto count = static_cast<double>(m);
  std::vector<double> theta(m), theta_sq(m), bunch(m), bunch_sq(m), photons(m),
      odd(m);
  for (std::size_t k = 0; k < n_records; ++k) {
    for (std::size_t q = 0; q < m; ++q) {
      const auto& r = result.trajectories[q].records[k];
      theta[q] = r.theta;
      theta_sq[q] = r.theta * r.theta;
      bunch[q] = r.bunching;
      bunch_sq[q] = r.bunching * r.bunching;
      photons[q] = r.photon_number;
      odd[q] = r.theta < 0.0 ? 1.0 : 0.0;
    }
    AggregatePoint a;
    a.t = result.trajectories.front().records[k].t;
    a.theta_mean = pairwise_sum(theta) / count;
    a.theta_std = std::sqrt(
        std::max(0.0, pairwise_sum(theta_sq) / count - a.theta_mean * a.theta_mean));
    a.bunching_mean = pairwise_sum(bunch) / count;
    a.bunching_std = std::sqrt(std::max(
        0.0, pairwise_sum(bunch_sq) / count - a.bunching_mean * a.bunching_mean));
    a.photon_number_mean = pairwise_sum(photons) / count;
    a.odd_fraction = pairwise_sum(odd) / count;
    result.aggregate.push_back(a);
  }
}

std::size_t record_index(const EnsembleResult& result, double t) {
  if (result.trajectories.empty())
    throw std::invalid_argument("ensemble has no trajectories");
  const auto& records = result.trajectories.front().records;
  for (std::size_t k = 0; k < records.size(); ++k)
    if (same_time(records[k].t, t)) return k;
  throw std::invalid_argument("time " + std::to_string(t) + " was not recorded");
}

double odd_fraction(const EnsembleResult& result, double at_time) {
  const std::size_t k = record_index(result, at_time);
  std::size_t odd = 0;
  for (const auto& tr : result.trajectories)
    if (tr.records[k].theta < 0.0) ++odd;
  return static_cast<double>(odd) / static_cast<double>(result.trajectories.size());
}

Histogram position_histogram(const EnsembleResult& result, double at_time,
                             int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  if (result.trajectories.empty())
    throw std::invalid_argument("ensemble has no trajectories");

  std::vector<double> counts(static_cast<std::size_t>(n_bins), 0.0);
  const double width = kTwoPi / n_bins;
  double total = 0.0;
  for (const auto& tr : result.trajectories) {
    auto snap = std::find_if(tr.snapshots.begin(), tr.snapshots.end(),
                             [&](const auto& s) { return same_time(s.t, at_time); });
    if (snap == tr.snapshots.end())
      throw std::invalid_argument("no position snapshot at t = " +
                                  std::to_string(at_time));
    for (double x : snap->x) {
      auto bin = static_cast<std::size_t>(wrap_position(x) / width);
      counts[std::min(bin, counts.size() - 1)] += 1.0;
      total += 1.0;
    }
  }

  Histogram h;
  for (int b = 0; b < n_bins; ++b) {
    h.bin_centers.push_back((b + 0.5) * width);
    h.density.push_back(counts[static_cast<std::size_t>(b)] / (total * width));
  }
  return h;
}

}  // namespace cavityseed
