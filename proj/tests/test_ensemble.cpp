#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "cavityseed/ensemble.hpp"

using namespace cavityseed;
using std::numbers::pi;

namespace {

SimParams desk_params(int n = 40) {
  SimParams p;
  p.n_atoms = n;
  p.eta = 500.0 / std::sqrt(static_cast<double>(n));
  p.u0 = -100.0 / n;
  p.kappa = 100.0;
  p.delta_c = -150.0;
  p.temp_init = 200.0;
  p.dt = 5e-3;
  return p;
}

IntegratorConfig short_run(double t_end = 0.5) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.record_stride = 20;
  cfg.snapshot_times = {0.0, t_end};
  return cfg;
}

const PumpSchedule kNoDrive({{0.0, Complex{}}});

bool same_records(const TrajectoryResult& a, const TrajectoryResult& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    const auto& u = a.records[k];
    const auto& v = b.records[k];
    if (u.t != v.t || u.theta != v.theta || u.bunching != v.bunching ||
        u.re_alpha != v.re_alpha || u.im_alpha != v.im_alpha)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS((EnsembleSpec{0, 1, 0, {}}.validate()), ConfigError);
  CHECK_THROWS_AS((EnsembleSpec{1, 0, 0, {}}.validate()), ConfigError);
  CHECK(EnsembleSpec{3, 4, 0, {}}.size() == 12);
}

TEST_CASE("pairwise summation") {
  std::vector<double> ones(1000, 0.1);
  CHECK(pairwise_sum(ones) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  std::vector<double> v{1.0, 2.0, 3.0};
  CHECK(pairwise_sum(v) == 6.0);
}

TEST_CASE("without noise, trajectories differ only by initial condition") {
  SimParams p = desk_params();
  p.noise_on = false;
  const auto r = run_ensemble(p, kNoDrive, short_run(), EnsembleSpec{2, 2, 5, {}},
                              EnsembleOptions{1, false});
  REQUIRE(r.trajectories.size() == 4);
  CHECK(r.trajectories[1].init_index == 0);
  CHECK(r.trajectories[1].noise_index == 1);
  CHECK(same_records(r.trajectories[0], r.trajectories[1]));
  CHECK(same_records(r.trajectories[2], r.trajectories[3]));
  CHECK_FALSE(same_records(r.trajectories[0], r.trajectories[2]));
}

TEST_CASE("results do not depend on the number of workers") {
  const SimParams p = desk_params();
  const PumpSchedule drive({{0.0, Complex{}}, {0.2, Complex{-300.0, 0.0}}});
  const EnsembleSpec spec{3, 4, 17, {}};
  const auto one = run_ensemble(p, drive, short_run(), spec, EnsembleOptions{1, false});
  for (int workers : {2, 5, 16}) {
    CAPTURE(workers);
    const auto many =
        run_ensemble(p, drive, short_run(), spec, EnsembleOptions{workers, false});
    REQUIRE(many.trajectories.size() == one.trajectories.size());
    for (std::size_t q = 0; q < one.trajectories.size(); ++q) {
      CHECK(same_records(one.trajectories[q], many.trajectories[q]));
      CHECK(one.trajectories[q].snapshots.back().x == many.trajectories[q].snapshots.back().x);
    }
    CHECK(one.aggregate == many.aggregate);
  }
}

TEST_CASE("mirrored ensemble is the parity image without a drive") {
  const SimParams p = desk_params();
  const EnsembleSpec spec{4, 2, 3, {}};
  const auto plain = run_ensemble(p, kNoDrive, short_run(), spec, EnsembleOptions{1, false});
  const auto mirrored = run_ensemble(p, kNoDrive, short_run(), spec, EnsembleOptions{1, true});
  for (std::size_t k = 0; k < plain.aggregate.size(); ++k) {
    CHECK(mirrored.aggregate[k].theta_mean ==
          doctest::Approx(-plain.aggregate[k].theta_mean).epsilon(1e-6));
    CHECK(mirrored.aggregate[k].bunching_mean ==
          doctest::Approx(plain.aggregate[k].bunching_mean).epsilon(1e-6));
  }
  const auto a = plain.final_theta();
  const auto b = mirrored.final_theta();
  for (std::size_t q = 0; q < a.size(); ++q)
    CHECK(b[q] == doctest::Approx(-a[q]).epsilon(1e-6));
}

TEST_CASE("aggregates and odd fraction") {
  EnsembleResult r;
  r.spec = {4, 1, 0, {}};
  const double thetas[4] = {-0.5, 0.25, -0.1, 0.0};
  for (int q = 0; q < 4; ++q) {
    TrajectoryResult tr;
    tr.init_index = q;
    ObservableRecord start;
    start.t = 0.0;
    ObservableRecord end;
    end.t = 3.0;
    end.theta = thetas[q];
    end.bunching = 0.5 + 0.1 * q;
    end.photon_number = q;
    tr.records = {start, end};
    r.trajectories.push_back(tr);
  }
  compute_aggregates(r);
  REQUIRE(r.aggregate.size() == 2);
  const auto& a = r.aggregate[1];
  CHECK(a.t == 3.0);
  CHECK(a.theta_mean == doctest::Approx(-0.0875));
  CHECK(a.theta_std == doctest::Approx(std::sqrt((0.25 + 0.0625 + 0.01) / 4 - 0.0875 * 0.0875)));
  CHECK(a.bunching_mean == doctest::Approx(0.65));
  CHECK(a.photon_number_mean == doctest::Approx(1.5));
  // theta = 0 counts as not odd
  CHECK(a.odd_fraction == doctest::Approx(0.5));
  CHECK(odd_fraction(r, 3.0) == doctest::Approx(0.5));
  CHECK(odd_fraction(r, 0.0) == 0.0);
  CHECK_THROWS_AS(odd_fraction(r, 1.0), std::invalid_argument);
  CHECK(r.final_theta()[0] == -0.5);
}

TEST_CASE("position histogram") {
  EnsembleResult r;
  TrajectoryResult tr;
  tr.snapshots = {{2.0, {pi / 2, pi / 2, 3 * pi / 2, 2 * pi - 1e-15}}};
  tr.records = {ObservableRecord{}};
  r.trajectories = {tr};
  const auto h = position_histogram(r, 2.0, 4);
  REQUIRE(h.density.size() == 4);
  const double width = pi / 2;
  double integral = 0.0;
  for (double d : h.density) integral += d * width;
  CHECK(integral == doctest::Approx(1.0));
  CHECK(h.bin_centers[0] == doctest::Approx(pi / 4));
  CHECK(h.density[1] == doctest::Approx(0.5 / width));
  CHECK(h.density[3] == doctest::Approx(0.5 / width));
  CHECK_THROWS_AS(position_histogram(r, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(position_histogram(r, 2.0, 0), std::invalid_argument);
}

TEST_CASE("uniform initial positions give a flat histogram") {
  const SimParams p = desk_params(2000);
  IntegratorConfig cfg = short_run(1e-3);
  cfg.snapshot_times = {0.0};
  const auto r = run_ensemble(p, kNoDrive, cfg, EnsembleSpec{5, 1, 1, {}});
  const auto h = position_histogram(r, 0.0, 16);
  for (double d : h.density) CHECK(d == doctest::Approx(1.0 / (2 * pi)).epsilon(0.1));
}

TEST_CASE("a failing trajectory aborts the ensemble and is identified") {
  SimParams p = desk_params(4);
  p.u0 = -1e307;
  const PumpSchedule drive({{0.0, Complex{1e6, 0.0}}});
  try {
    run_ensemble(p, drive, short_run(), EnsembleSpec{3, 2, 0, {}}, EnsembleOptions{2, false});
    FAIL("expected an IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(std::string(e.what()).find("trajectory (0, 0)") != std::string::npos);
  }
}

TEST_CASE("even-pattern preparation") {
  const SimParams p = desk_params(60);
  IntegratorConfig cfg = short_run(30.0);
  cfg.record_stride = 200;
  cfg.snapshot_times = {};
  const PumpSchedule drive({{0.0, Complex{}}, {20.0, Complex{500.0, 0.0}}});
  EnsembleSpec spec{6, 1, 4, 20.0};
  const auto r = run_ensemble(p, drive, cfg, spec);
  const std::size_t k = record_index(r, 20.0);
  for (const auto& tr : r.trajectories) CHECK(tr.records[k].theta >= 0.0);

  EnsembleSpec late = spec;
  late.even_pattern_at = 25.0;
  CHECK_THROWS_AS(run_ensemble(p, drive, cfg, late), ConfigError);
  late.even_pattern_at = 40.0;
  CHECK_THROWS_AS(run_ensemble(p, kNoDrive, cfg, late), ConfigError);
}
