#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavityseed/integrator.hpp"

using namespace cavityseed;
using std::numbers::pi;

namespace {

SimParams small_params(int n = 50) {
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

const PumpSchedule kNoDrive({{0.0, Complex{}}});

TrajectoryState random_atoms(int n, std::uint64_t seed) {
  SimParams p = small_params(n);
  RandomSource src(seed);
  return sample_initial(p, src);
}

}  // namespace

TEST_CASE("scheme names") {
  CHECK(to_string(Scheme::euler_maruyama) == "euler_maruyama");
  CHECK(scheme_from_string("split_exponential") == Scheme::split_exponential);
  CHECK_THROWS_AS(scheme_from_string("rk4"), ConfigError);
}

TEST_CASE("thermal initial state") {
  SimParams p = small_params(100000);
  RandomSource src(2024);
  const TrajectoryState s = sample_initial(p, src);
  REQUIRE(s.x.size() == 100000);
  CHECK(s.alpha == Complex{});
  CHECK(s.t == 0.0);
  double mean_p = 0.0, mean_p2 = 0.0, mean_x = 0.0;
  for (std::size_t j = 0; j < s.x.size(); ++j) {
    CHECK(s.x[j] >= 0.0);
    CHECK(s.x[j] < 2 * pi);
    mean_x += s.x[j];
    mean_p += s.p[j];
    mean_p2 += s.p[j] * s.p[j];
  }
  mean_x /= 1e5;
  mean_p /= 1e5;
  const double var_p = mean_p2 / 1e5 - mean_p * mean_p;
  // m k_B T = 0.5 * 200
  CHECK(var_p == doctest::Approx(100.0).epsilon(0.015));
  CHECK(std::abs(mean_p) < 0.2);
  CHECK(mean_x == doctest::Approx(pi).epsilon(0.01));
}

TEST_CASE("initial state depends only on the init index") {
  const SimParams p = small_params();
  const auto a = sample_initial(p, RngStream{7, 3, 0});
  const auto b = sample_initial(p, RngStream{7, 3, 9});
  const auto c = sample_initial(p, RngStream{7, 4, 0});
  CHECK(a.x == b.x);
  CHECK(a.p == b.p);
  CHECK(a.x != c.x);
  CHECK(RngStream{7, 3, 0}.noise_source() != RngStream{7, 3, 1}.noise_source());
}

TEST_CASE("empty cavity decays at rate kappa") {
  SimParams p = small_params(1);
  p.eta = 0.0;
  p.noise_on = false;
  for (Scheme scheme : {Scheme::split_exponential, Scheme::euler_maruyama}) {
    CAPTURE(to_string(scheme));
    p.dt = scheme == Scheme::euler_maruyama ? 1e-5 : 1e-3;
    IntegratorConfig cfg;
    cfg.scheme = scheme;
    cfg.freeze_atoms = true;
    cfg.t_end = 0.05;
    TrajectoryState s;
    s.x = {0.0};
    s.p = {0.0};
    s.alpha = Complex{1.0, 0.0};
    RandomSource noise(1);
    const auto run = run_trajectory(p, kNoDrive, cfg, noise, s);
    const double expected = std::exp(-p.kappa * cfg.t_end);
    const double tol = scheme == Scheme::euler_maruyama ? 1e-3 : 1e-12;
    CHECK(std::abs(run.final_state.alpha) == doctest::Approx(expected).epsilon(tol));
    // rotation at the empty-cavity detuning delta_c (atom at a node)
    const Complex phase = run.final_state.alpha / std::abs(run.final_state.alpha);
    const Complex want = std::polar(1.0, p.delta_c * cfg.t_end);
    CHECK(std::abs(phase - want) < 10 * tol);
  }
}

TEST_CASE("frozen atoms relax to the steady-state field") {
  SimParams p = small_params(40);
  p.noise_on = false;
  p.dt = 1e-3;
  for (int trial = 0; trial < 5; ++trial) {
    TrajectoryState s = random_atoms(40, 100 + trial);
    const Complex eta_p{100.0 * trial, -50.0};
    const PumpSchedule drive({{0.0, eta_p}});
    IntegratorConfig cfg;
    cfg.freeze_atoms = true;
    cfg.t_end = 20.0 / p.kappa;
    RandomSource noise(0);
    const auto run = run_trajectory(p, drive, cfg, noise, s);
    const Complex target =
        steady_state_field(order_parameter(s.x), bunching(s.x), eta_p, p);
    CHECK(std::abs(run.final_state.alpha - target) < 1e-6);
    CHECK(run.final_state.x == s.x);
  }
}

TEST_CASE("vacuum noise gives half a photon in steady state") {
  SimParams p = small_params(1);
  p.eta = 0.0;
  p.dt = 1e-3;
  for (Scheme scheme : {Scheme::split_exponential, Scheme::euler_maruyama}) {
    CAPTURE(to_string(scheme));
    IntegratorConfig cfg;
    cfg.scheme = scheme;
    cfg.freeze_atoms = true;
    cfg.record_stride = 1;
    cfg.t_end = 200.0;
    TrajectoryState s;
    s.x = {1.0};
    s.p = {0.0};
    RandomSource noise(77);
    const auto run = run_trajectory(p, kNoDrive, cfg, noise, s);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : run.records) {
      if (r.t < 1.0) continue;  // discard the transient (100 / kappa)
      sum += r.photon_number;
      ++count;
    }
    REQUIRE(count >= 100000);
    CHECK(sum / count == doctest::Approx(0.5).epsilon(0.05));
  }
}

TEST_CASE("frozen field conserves mechanical energy") {
  SimParams p = small_params(100);
  p.noise_on = false;
  p.dt = 1e-3;
  TrajectoryState s = random_atoms(100, 5);
  s.alpha = Complex{-4.0, 3.0};
  IntegratorConfig cfg;
  cfg.freeze_field = true;
  cfg.t_end = 100.0;
  cfg.record_stride = 1000;
  RandomSource noise(0);
  const double e0 = mechanical_energy(s, p);
  const auto run = run_trajectory(p, kNoDrive, cfg, noise, s);
  CHECK(run.final_state.alpha == s.alpha);
  const double e1 = mechanical_energy(run.final_state, p);
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-3);
}

TEST_CASE("runs are reproducible") {
  SimParams p = small_params();
  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  cfg.record_stride = 10;
  const RngStream rng{11, 2, 3};
  const auto a = run_trajectory(p, kNoDrive, cfg, rng);
  const auto b = run_trajectory(p, kNoDrive, cfg, rng);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].theta == b.records[k].theta);
    CHECK(a.records[k].re_alpha == b.records[k].re_alpha);
  }
  CHECK(a.final_state.x == b.final_state.x);
}

TEST_CASE("each noisy step draws two gaussians") {
  SimParams p = small_params();
  IntegratorConfig cfg;
  TrajectoryState s = random_atoms(p.n_atoms, 1);
  RandomSource used(42);
  for (int k = 0; k < 25; ++k) step(s, Complex{}, p, cfg, p.dt, used);
  RandomSource reference(42);
  for (int k = 0; k < 50; ++k) reference.gaussian(1.0);
  CHECK(used == reference);

  p.noise_on = false;
  RandomSource silent(42);
  step(s, Complex{}, p, cfg, p.dt, silent);
  CHECK(silent == RandomSource(42));
}

TEST_CASE("steps land exactly on switch times, snapshots and t_end") {
  SimParams p = small_params(20);
  const PumpSchedule drive({{0.0, Complex{}}, {0.1234, Complex{300.0, 0.0}}});
  IntegratorConfig cfg;
  cfg.t_end = 0.3;
  cfg.record_stride = 7;
  cfg.snapshot_times = {0.0, 0.2001, 0.3};
  RandomSource noise(3);
  TrajectoryState s = random_atoms(20, 8);
  const auto run = run_trajectory(p, drive, cfg, noise, s);
  CHECK(run.final_state.t == 0.3);
  CHECK(run.records.front().t == 0.0);
  CHECK(run.records.back().t == 0.3);
  bool hit_switch = false;
  for (const auto& r : run.records) hit_switch |= r.t == 0.1234;
  CHECK(hit_switch);
  REQUIRE(run.snapshots.size() == 3);
  CHECK(run.snapshots[0].x == s.x);
  CHECK(run.snapshots[1].t == 0.2001);
  CHECK(run.snapshots[2].x == run.final_state.x);
  for (std::size_t k = 1; k < run.records.size(); ++k)
    CHECK(run.records[k].t > run.records[k - 1].t);
}

TEST_CASE("chained runs match a single run bit for bit") {
  SimParams p = small_params(30);
  p.dt = 2e-3;
  const PumpSchedule drive({{0.0, Complex{}},
                            {0.5, Complex{0.0, 2e3}},
                            {0.7, Complex{200.0, 0.0}}});
  const TrajectoryState s = random_atoms(30, 4);

  IntegratorConfig whole;
  whole.t_end = 1.0;
  whole.record_stride = 5;
  RandomSource noise_a(9);
  const auto mono = run_trajectory(p, drive, whole, noise_a, s);

  IntegratorConfig first = whole;
  first.t_end = 0.5;
  IntegratorConfig second = whole;
  RandomSource noise_b(9);
  const auto part1 = run_trajectory(p, drive, first, noise_b, s);
  const auto part2 = run_trajectory(p, drive, second, noise_b, part1.final_state);

  CHECK(part2.final_state.x == mono.final_state.x);
  CHECK(part2.final_state.p == mono.final_state.p);
  CHECK(part2.final_state.alpha == mono.final_state.alpha);
  CHECK(part1.records.size() + part2.records.size() == mono.records.size() + 1);
}

TEST_CASE("parity partner follows the mirrored path without a drive") {
  SimParams p = small_params(30);
  IntegratorConfig cfg;
  cfg.t_end = 0.5;
  cfg.record_stride = 10;
  TrajectoryState s = random_atoms(30, 12);
  TrajectoryState m = s;
  for (auto& x : m.x) x = wrap_position(-x);
  for (auto& v : m.p) v = -v;
  RandomSource na(5), nb(5);
  nb.set_mirrored(true);
  const auto a = run_trajectory(p, kNoDrive, cfg, na, s);
  const auto b = run_trajectory(p, kNoDrive, cfg, nb, m);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(b.records[k].theta == doctest::Approx(-a.records[k].theta).epsilon(1e-6));
    CHECK(b.records[k].re_alpha == doctest::Approx(-a.records[k].re_alpha).epsilon(1e-6));
    CHECK(b.records[k].photon_number ==
          doctest::Approx(a.records[k].photon_number).epsilon(1e-6));
  }
}

TEST_CASE("both schemes agree on the order parameter") {
  // Euler-Maruyama at kappa dt = 0.001 is the reference. With many atoms the
  // motion mixes and amplifies any discretisation difference, so that case
  // is compared at t = 1. A lone atom sits in a very deep well (omega dt
  // ~ 0.1 at dt = 1e-3), so it is compared at t = 10 with a finer step.
  struct Case {
    int n;
    double t_end;
    double split_dt;
  };
  for (const Case c : {Case{20, 1.0, 1e-3}, Case{1, 10.0, 1e-4}}) {
    CAPTURE(c.n);
    SimParams p = small_params(c.n);
    p.noise_on = false;
    TrajectoryState s = random_atoms(c.n, 21);
    IntegratorConfig split;
    split.t_end = c.t_end;
    split.record_stride = 1000000;
    IntegratorConfig em = split;
    em.scheme = Scheme::euler_maruyama;
    SimParams p_split = p;
    p_split.dt = c.split_dt;
    SimParams p_em = p;
    p_em.dt = 1e-5;
    RandomSource n1(0), n2(0);
    const auto a = run_trajectory(p_split, kNoDrive, split, n1, s);
    const auto b = run_trajectory(p_em, kNoDrive, em, n2, s);
    CHECK(std::abs(a.records.back().theta - b.records.back().theta) < 1e-3);
  }
}

TEST_CASE("exact field update is stationary even at kappa dt = 10") {
  SimParams p = small_params(1);
  p.eta = 0.0;
  p.dt = 0.1;
  IntegratorConfig cfg;
  cfg.freeze_atoms = true;
  cfg.record_stride = 1;
  cfg.t_end = 2e4;
  TrajectoryState s;
  s.x = {2.0};
  s.p = {0.0};
  RandomSource noise(8);
  const auto run = run_trajectory(p, kNoDrive, cfg, noise, s);
  double sum = 0.0;
  for (std::size_t k = 1; k < run.records.size(); ++k) sum += run.records[k].photon_number;
  CHECK(sum / (run.records.size() - 1) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("configuration checks") {
  SimParams p = small_params();
  IntegratorConfig cfg;
  cfg.scheme = Scheme::euler_maruyama;
  p.dt = 2e-3;  // kappa dt = 0.2
  CHECK_THROWS_AS(cfg.validate(p), ConfigError);
  p.dt = 1e-3;
  CHECK_NOTHROW(cfg.validate(p));

  cfg.record_stride = 0;
  CHECK_THROWS_AS(cfg.validate(p), ConfigError);
  cfg.record_stride = 1;
  cfg.t_end = -1.0;
  CHECK_THROWS_AS(cfg.validate(p), ConfigError);
}

TEST_CASE("non-finite states are reported") {
  SimParams p = small_params(5);
  TrajectoryState s = random_atoms(5, 1);
  s.alpha = Complex{std::numeric_limits<double>::quiet_NaN(), 0.0};
  IntegratorConfig cfg;
  cfg.t_end = 0.1;
  RandomSource noise(1);
  CHECK_THROWS_AS(run_trajectory(p, kNoDrive, cfg, noise, s), IntegrationError);
}
