#include "cavityseed/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace cavityseed {

using nlohmann::json;

namespace {

std::string number_label(double v) {
  std::ostringstream out;
  if (v < 0) out << 'm';
  out << std::abs(v);
  return out.str();
}

void set_stride(Scenario& s) {
  s.cfg.record_stride = record_stride_for(s.cfg.t_end, s.params.dt);
}

// Reject keys outside `allowed`.
void check_keys(const json& j, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(path + "." + key + ": unknown field");
  }
}

template <typename T>
T get_field(const json& j, const std::string& path, const char* key) {
  const std::string where = path + "." + key;
  if (!j.contains(key)) throw ConfigError(where + ": missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": wrong type");
  }
}

double get_number(const json& j, const std::string& path, const char* key) {
  const std::string where = path + "." + key;
  if (!j.contains(key)) throw ConfigError(where + ": missing field");
  if (!j.at(key).is_number()) throw ConfigError(where + ": expected a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& path, const char* key) {
  const std::string where = path + "." + key;
  if (!j.contains(key)) throw ConfigError(where + ": missing field");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  const auto value = v.get<std::int64_t>();
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
    throw ConfigError(where + ": integer out of range");
  return static_cast<int>(value);
}

// Re-throws a ConfigError with the field path when `check` rejects the value.
template <typename F>
void checked(const std::string& where, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

void Scenario::validate() const {
  if (name.empty()) throw ConfigError("scenario name is empty");
  params.validate();
  cfg.validate(params);
  spec.validate();
  if (outputs.histogram_bins < 1) throw ConfigError("histogram_bins must be >= 1");
  for (double t : outputs.histogram_times)
    if (std::find(cfg.snapshot_times.begin(), cfg.snapshot_times.end(), t) ==
        cfg.snapshot_times.end())
      throw ConfigError("histogram time without a matching snapshot time");
}

bool operator==(const Scenario& a, const Scenario& b) {
  const auto& p = a.params;
  const auto& q = b.params;
  return a.name == b.name && p.n_atoms == q.n_atoms && p.eta == q.eta &&
         p.u0 == q.u0 && p.kappa == q.kappa && p.delta_c == q.delta_c &&
         p.temp_init == q.temp_init && p.dt == q.dt && p.noise_on == q.noise_on &&
         a.schedule == b.schedule && a.cfg == b.cfg && a.spec == b.spec &&
         a.outputs == b.outputs && a.metadata == b.metadata;
}

void ScaleOverrides::validate() const {
  for (double f : {ensemble, time, atoms})
    if (!(f > 0.0) || !std::isfinite(f))
      throw ConfigError("scale factors must be positive finite numbers");
}

SimParams base_params(double sqrt_n_eta, int n_atoms) {
  SimParams p;
  p.n_atoms = n_atoms;
  p.eta = sqrt_n_eta / std::sqrt(static_cast<double>(n_atoms));
  p.u0 = reference::kNU0 / n_atoms;
  p.kappa = reference::kKappa;
  p.delta_c = reference::kDeltaC;
  p.temp_init = reference::kTemperature;
  p.dt = reference::kDefaultDt;
  p.noise_on = true;
  return p;
}

int record_stride_for(double t_end, double dt, int max_rows) {
  const double steps = std::ceil(t_end / dt - 1e-9);
  return std::max(1, static_cast<int>(std::ceil(steps / max_rows)));
}

Scenario scenario_selforg() {
  Scenario s;
  s.name = "selforg";
  s.params = base_params();
  s.schedule = PumpSchedule(Complex{0.0, 0.0});
  s.cfg.t_end = 1e4;
  s.cfg.snapshot_times = {0.0, s.cfg.t_end};
  s.spec = EnsembleSpec{50, 10, 0, {}};
  s.outputs.histogram_times = s.cfg.snapshot_times;
  s.metadata["sqrt_n_eta"] = reference::kSqrtNEta;
  s.metadata["sqrt_n_eta_crit"] = reference::kSqrtNEtaCrit;
  set_stride(s);
  return s;
}

Scenario scenario_seeded(Complex eta_p, bool transverse_on) {
  Scenario s;
  s.name = "seeded";
  s.params = base_params(transverse_on ? reference::kSqrtNEta : 0.0);
  s.schedule = PumpSchedule(eta_p);
  s.cfg.t_end = 1e4;
  s.cfg.snapshot_times = {0.0, s.cfg.t_end};
  s.spec = EnsembleSpec{20, 10, 0, {}};
  s.outputs.histogram_times = s.cfg.snapshot_times;
  s.metadata["sqrt_n_eta"] = transverse_on ? reference::kSqrtNEta : 0.0;
  s.metadata["eta_p_re"] = eta_p.real();
  s.metadata["eta_p_im"] = eta_p.imag();
  set_stride(s);
  return s;
}

ScenarioSet seeded_set() {
  ScenarioSet set{"seeded", {}};
  auto a = scenario_seeded(Complex{500.0, 0.0}, false);
  a.name = "seeded-a";
  auto b = scenario_seeded(Complex{-500.0, 0.0}, true);
  b.name = "seeded-b";
  b.spec.master_seed = 1;
  auto c = scenario_seeded(Complex{500.0, 0.0}, true);
  c.name = "seeded-c";
  c.spec.master_seed = 2;
  set.members = {a, b, c};
  return set;
}

std::vector<double> default_odd_probability_values() {
  return {0.0, 125.0, 250.0, 375.0, 500.0, 750.0, 1000.0, 1500.0, 2000.0};
}

ScenarioSet scenario_odd_probability(const std::vector<double>& eta_p_values) {
  ScenarioSet set{"odd-prob", {}};
  std::uint64_t seed = 0;
  for (double eta_p : eta_p_values) {
    if (!(eta_p >= 0.0)) throw ConfigError("odd-prob eta_p values must be >= 0");
    Scenario s;
    s.name = "odd-prob-etap-" + number_label(eta_p);
    s.params = base_params();
    s.schedule = PumpSchedule(Complex{eta_p, 0.0});
    s.cfg.t_end = 1.0;
    s.spec = EnsembleSpec{5000, 5, seed++, {}};
    s.outputs.write_trajectories = false;
    s.metadata["eta_p"] = eta_p;
    set_stride(s);
    set.members.push_back(std::move(s));
  }
  return set;
}

std::vector<double> default_phase_diagram_eta_p() { return {0.0, -500.0, -5000.0}; }

std::vector<double> default_phase_diagram_sqrt_n_eta() {
  return {0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 450.0, 500.0};
}

ScenarioSet scenario_phase_diagram(double eta_p,
                                   const std::vector<double>& sqrt_n_eta_values) {
  ScenarioSet set{"phase-diagram", {}};
  std::uint64_t seed = 0;
  for (double sqrt_n_eta : sqrt_n_eta_values) {
    Scenario s;
    s.name = "phase-diagram-etap-" + number_label(eta_p) + "-sqrtneta-" +
             number_label(sqrt_n_eta);
    s.params = base_params(sqrt_n_eta);
    s.schedule = PumpSchedule(Complex{eta_p, 0.0});
    s.cfg.t_end = 20.0 * s.params.n_atoms;
    s.spec = EnsembleSpec{5, 5, seed++, {}};
    s.metadata["eta_p"] = eta_p;
    s.metadata["sqrt_n_eta"] = sqrt_n_eta;
    set_stride(s);
    set.members.push_back(std::move(s));
  }
  return set;
}

ScenarioSet scenario_buildup() {
  ScenarioSet set{"buildup", {}};
  std::uint64_t seed = 0;
  for (double eta_p : {0.0, -500.0, -5000.0}) {
    for (double sqrt_n_eta : {0.0, 90.0, 120.0, 180.0}) {
      Scenario s;
      s.name = "buildup-etap-" + number_label(eta_p) + "-sqrtneta-" +
               number_label(sqrt_n_eta);
      s.params = base_params(sqrt_n_eta);
      s.schedule = PumpSchedule(Complex{eta_p, 0.0});
      s.cfg.t_end = 20.0 * s.params.n_atoms;
      s.spec = EnsembleSpec{5, 5, seed++, {}};
      s.metadata["eta_p"] = eta_p;
      s.metadata["sqrt_n_eta"] = sqrt_n_eta;
      set_stride(s);
      set.members.push_back(std::move(s));
    }
  }
  return set;
}

Scenario scenario_flip() {
  Scenario s;
  s.name = "flip";
  s.params = base_params();
  s.params.dt = reference::kFlipDt;
  s.schedule = PumpSchedule({{0.0, Complex{0.0, 0.0}},
                             {2000.0, Complex{0.0, 2e4}},
                             {2100.0, Complex{500.0, 0.0}}});
  s.cfg.t_end = 4000.0;
  s.spec = EnsembleSpec{10, 1, 0, {}};
  s.spec.even_pattern_at = 1900.0;
  s.metadata["sqrt_n_eta"] = reference::kSqrtNEta;
  set_stride(s);
  return s;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{
      "selforg", "seeded", "odd-prob", "phase-diagram", "buildup", "flip"};
  return names;
}

std::string_view scenario_description(std::string_view name) {
  if (name == "selforg") return "spontaneous self-organisation without cavity drive";
  if (name == "seeded") return "seeded patterns: eta=0/eta_p=500, eta_p=-500, eta_p=+500";
  if (name == "odd-prob") return "probability of an odd pattern after t=1 versus eta_p";
  if (name == "phase-diagram")
    return "steady-state theta and bunching versus sqrt(N)*eta for eta_p in {0,-500,-5000}";
  if (name == "buildup") return "pattern build-up dynamics for a 4x3 (eta, eta_p) grid";
  if (name == "flip") return "pattern flip with a phase-shifted longitudinal pulse";
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

ScenarioSet make_scenario_set(std::string_view name) {
  if (name == "selforg") return {"selforg", {scenario_selforg()}};
  if (name == "seeded") return seeded_set();
  if (name == "odd-prob")
    return scenario_odd_probability(default_odd_probability_values());
  if (name == "phase-diagram") {
    ScenarioSet all{"phase-diagram", {}};
    std::uint64_t seed = 0;
    for (double eta_p : default_phase_diagram_eta_p()) {
      for (auto& s :
           scenario_phase_diagram(eta_p, default_phase_diagram_sqrt_n_eta()).members) {
        s.spec.master_seed = seed++;
        all.members.push_back(std::move(s));
      }
    }
    return all;
  }
  if (name == "buildup") return scenario_buildup();
  if (name == "flip") return {"flip", {scenario_flip()}};
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

void apply_scale(Scenario& s, const ScaleOverrides& scale) {
  scale.validate();
  if (scale.is_identity()) return;

  if (scale.ensemble != 1.0) {
    s.spec.n_init = std::max(
        1, static_cast<int>(std::lround(s.spec.n_init * scale.ensemble)));
  }

  if (scale.time != 1.0) {
    s.cfg.t_end *= scale.time;
    for (double& t : s.cfg.snapshot_times) t *= scale.time;
    for (double& t : s.outputs.histogram_times) t *= scale.time;
    if (s.spec.even_pattern_at) *s.spec.even_pattern_at *= scale.time;
    std::vector<PumpSchedule::Segment> segments(s.schedule.segments().begin(),
                                                s.schedule.segments().end());
    for (auto& seg : segments) seg.t_start *= scale.time;
    s.schedule = PumpSchedule(std::move(segments));
  }

  if (scale.atoms != 1.0) {
    const int n_old = s.params.n_atoms;
    const int n_new =
        std::max(1, static_cast<int>(std::lround(n_old * scale.atoms)));
    const double ratio = static_cast<double>(n_old) / n_new;
    s.params.eta *= std::sqrt(ratio);
    s.params.u0 *= ratio;
    s.params.n_atoms = n_new;
  }

  s.metadata["scale_ensemble"] = scale.ensemble;
  s.metadata["scale_time"] = scale.time;
  s.metadata["scale_atoms"] = scale.atoms;
  set_stride(s);
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(path + ": expected a number or [re, im]");
}

json to_json(const Scenario& s) {
  json schedule = json::array();
  for (const auto& seg : s.schedule.segments())
    schedule.push_back({{"t_start", seg.t_start}, {"eta_p", complex_to_json(seg.eta_p)}});
  return json{
      {"name", s.name},
      {"params",
       {{"n_atoms", s.params.n_atoms},
        {"eta", s.params.eta},
        {"u0", s.params.u0},
        {"kappa", s.params.kappa},
        {"delta_c", s.params.delta_c},
        {"temp_init", s.params.temp_init},
        {"dt", s.params.dt},
        {"noise_on", s.params.noise_on}}},
      {"schedule", schedule},
      {"integrator",
       {{"scheme", std::string(to_string(s.cfg.scheme))},
        {"record_stride", s.cfg.record_stride},
        {"t_end", s.cfg.t_end},
        {"snapshot_times", s.cfg.snapshot_times}}},
      {"ensemble",
       {{"n_init", s.spec.n_init},
        {"n_noise", s.spec.n_noise},
        {"master_seed", s.spec.master_seed},
        {"even_pattern_at", s.spec.even_pattern_at ? json(*s.spec.even_pattern_at)
                                                   : json(nullptr)}}},
      {"outputs",
       {{"histogram_times", s.outputs.histogram_times},
        {"histogram_bins", s.outputs.histogram_bins},
        {"write_trajectories", s.outputs.write_trajectories}}},
      {"metadata", s.metadata},
  };
}

Scenario scenario_from_json(const json& j, const std::string& path) {
  check_keys(j, path,
             {"name", "params", "schedule", "integrator", "ensemble", "outputs",
              "metadata"});
  Scenario s;
  s.name = get_field<std::string>(j, path, "name");

  const std::string pp = path + ".params";
  const json& params = j.at("params");
  check_keys(params, pp,
             {"n_atoms", "eta", "u0", "kappa", "delta_c", "temp_init", "dt",
              "noise_on"});
  s.params.n_atoms = get_int(params, pp, "n_atoms");
  s.params.eta = get_number(params, pp, "eta");
  s.params.u0 = get_number(params, pp, "u0");
  s.params.kappa = get_number(params, pp, "kappa");
  s.params.delta_c = get_number(params, pp, "delta_c");
  s.params.temp_init = get_number(params, pp, "temp_init");
  s.params.dt = get_number(params, pp, "dt");
  s.params.noise_on = get_field<bool>(params, pp, "noise_on");

  const std::string sp = path + ".schedule";
  const json& schedule = j.at("schedule");
  if (!schedule.is_array()) throw ConfigError(sp + ": expected an array");
  std::vector<PumpSchedule::Segment> segments;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const std::string where = sp + "[" + std::to_string(k) + "]";
    check_keys(schedule[k], where, {"t_start", "eta_p"});
    if (!schedule[k].contains("eta_p")) throw ConfigError(where + ".eta_p: missing field");
    segments.push_back({get_number(schedule[k], where, "t_start"),
                        complex_from_json(schedule[k].at("eta_p"), where + ".eta_p")});
  }
  checked(sp, [&] { s.schedule = PumpSchedule(std::move(segments)); });

  const std::string ip = path + ".integrator";
  const json& integrator = j.at("integrator");
  check_keys(integrator, ip, {"scheme", "record_stride", "t_end", "snapshot_times"});
  checked(ip + ".scheme", [&] {
    s.cfg.scheme = scheme_from_string(get_field<std::string>(integrator, ip, "scheme"));
  });
  s.cfg.record_stride = get_int(integrator, ip, "record_stride");
  s.cfg.t_end = get_number(integrator, ip, "t_end");
  s.cfg.snapshot_times =
      get_field<std::vector<double>>(integrator, ip, "snapshot_times");

  const std::string ep = path + ".ensemble";
  const json& ensemble = j.at("ensemble");
  check_keys(ensemble, ep, {"n_init", "n_noise", "master_seed", "even_pattern_at"});
  s.spec.n_init = get_int(ensemble, ep, "n_init");
  s.spec.n_noise = get_int(ensemble, ep, "n_noise");
  s.spec.master_seed = get_field<std::uint64_t>(ensemble, ep, "master_seed");
  if (ensemble.contains("even_pattern_at") && !ensemble.at("even_pattern_at").is_null())
    s.spec.even_pattern_at = get_number(ensemble, ep, "even_pattern_at");

  const std::string op = path + ".outputs";
  const json& outputs = j.at("outputs");
  check_keys(outputs, op, {"histogram_times", "histogram_bins", "write_trajectories"});
  s.outputs.histogram_times = get_field<std::vector<double>>(outputs, op, "histogram_times");
  s.outputs.histogram_bins = get_int(outputs, op, "histogram_bins");
  s.outputs.write_trajectories = get_field<bool>(outputs, op, "write_trajectories");

  if (j.contains("metadata"))
    s.metadata = get_field<std::map<std::string, double>>(j, path, "metadata");

  checked(path, [&] { s.validate(); });
  return s;
}

}  // namespace cavityseed
