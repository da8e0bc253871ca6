#pragma once

// Catalog of the seeding / self-organisation experiments. Each scenario is a
// complete description of a run: model parameters, pump schedule, integrator
// settings, ensemble layout and the reductions to emit.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cavityseed/ensemble.hpp"

namespace cavityseed {

struct ScenarioOutputs {
  std::vector<double> histogram_times;
  int histogram_bins = 64;
  bool write_trajectories = true;

  friend bool operator==(const ScenarioOutputs&, const ScenarioOutputs&) = default;
};

struct Scenario {
  std::string name;
  SimParams params;
  PumpSchedule schedule;
  IntegratorConfig cfg;
  EnsembleSpec spec;
  ScenarioOutputs outputs;
  // Descriptive constants carried along to the output (sweep coordinates,
  // reference thresholds). Never read by the integrator.
  std::map<std::string, double> metadata;

  void validate() const;
};

bool operator==(const Scenario& a, const Scenario& b);

/// A named family of scenarios run together (a sweep or a set of variants).
struct ScenarioSet {
  std::string name;
  std::vector<Scenario> members;
};

/// Multiplicative desk-scale overrides. Scaling the atom number holds the
/// collective couplings sqrt(N)*eta and N*U0 fixed.
struct ScaleOverrides {
  double ensemble = 1.0;
  double time = 1.0;
  double atoms = 1.0;

  bool is_identity() const {
    return ensemble == 1.0 && time == 1.0 && atoms == 1.0;
  }
  void validate() const;
};

// Reference constants of the base parameter set (all in omega_R units).
namespace reference {
inline constexpr int kAtoms = 1000;
inline constexpr double kSqrtNEta = 500.0;
inline constexpr double kNU0 = -100.0;
inline constexpr double kKappa = 100.0;
inline constexpr double kDeltaC = kNU0 / 2.0 - kKappa;
inline constexpr double kTemperature = 2.0 * kKappa;
inline constexpr double kSqrtNEtaCrit = 200.0;
inline constexpr double kDefaultDt = 5e-3;
inline constexpr double kFlipDt = 2e-3;
inline constexpr int kMaxRecordedRows = 10000;
}  // namespace reference

/// Base parameter set with the transverse pump given as sqrt(N)*eta.
SimParams base_params(double sqrt_n_eta = reference::kSqrtNEta,
                      int n_atoms = reference::kAtoms);

/// Record stride keeping a trajectory at or below max_rows samples.
int record_stride_for(double t_end, double dt,
                      int max_rows = reference::kMaxRecordedRows);

Scenario scenario_selforg();

/// Seeded run: transverse pump on (sqrt(N)*eta = 500) or off, cavity drive
/// eta_p.
Scenario scenario_seeded(Complex eta_p, bool transverse_on = true);
/// Variants (a) eta = 0, eta_p = 500; (b) eta_p = -500; (c) eta_p = +500.
ScenarioSet seeded_set();

ScenarioSet scenario_odd_probability(const std::vector<double>& eta_p_values);
std::vector<double> default_odd_probability_values();

ScenarioSet scenario_phase_diagram(double eta_p,
                                   const std::vector<double>& sqrt_n_eta_values);
std::vector<double> default_phase_diagram_eta_p();
std::vector<double> default_phase_diagram_sqrt_n_eta();

ScenarioSet scenario_buildup();

Scenario scenario_flip();

/// Stable CLI identifiers.
const std::vector<std::string>& scenario_names();
std::string_view scenario_description(std::string_view name);
ScenarioSet make_scenario_set(std::string_view name);

/// Applies desk-scale overrides in place.
void apply_scale(Scenario& scenario, const ScaleOverrides& scale);

nlohmann::json to_json(const Scenario& scenario);
/// Strict parse: unknown keys and out-of-range values throw ConfigError
/// naming the offending path (prefixed by `path`).
Scenario scenario_from_json(const nlohmann::json& j, const std::string& path = "scenario");

nlohmann::json complex_to_json(Complex z);
Complex complex_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace cavityseed
