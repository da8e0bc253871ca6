#include "cavityseed/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <span>
#include <sstream>

namespace cavityseed {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 14> kTopLevelKeys = {
    "scenario", "master_seed", "output_dir", "workers", "scale", "force",
    "params",   "integrator",  "ensemble",
    // informational keys carried by manifests
    "schema_version", "code_version", "source", "provenance", "files"};

void check_keys(const json& j, const std::string& path,
                std::span<const std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError((path.empty() ? key : path + "." + key) + ": unknown field");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  check_keys(j, path, std::span<const std::string_view>(allowed.begin(), allowed.size()));
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

std::int64_t integer_at(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<std::int64_t>();
}

int int_at(const json& j, const std::string& where, std::int64_t lo) {
  const std::int64_t v = integer_at(j, where);
  if (v < lo) throw ConfigError(where + ": must be >= " + std::to_string(lo));
  if (v > std::numeric_limits<int>::max())
    throw ConfigError(where + ": integer out of range");
  return static_cast<int>(v);
}

double positive_at(const json& j, const std::string& where) {
  const double v = number_at(j, where);
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(where + ": must be a positive finite number");
  return v;
}

bool bool_at(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
  return j.get<bool>();
}

// Moves snapshot / histogram times after a change of t_end: times at the old
// end follow it, times beyond the new end are dropped.
void retime(Scenario& s, double new_t_end) {
  const double old_t_end = s.cfg.t_end;
  const auto fix = [&](std::vector<double>& times) {
    std::vector<double> out;
    for (double t : times) {
      const double moved = t == old_t_end ? new_t_end : t;
      if (moved <= new_t_end && std::find(out.begin(), out.end(), moved) == out.end())
        out.push_back(moved);
    }
    times = std::move(out);
  };
  fix(s.cfg.snapshot_times);
  fix(s.outputs.histogram_times);
  s.cfg.t_end = new_t_end;
}

void apply_param_overrides(Scenario& s, const json& params) {
  const std::string path = "params";
  check_keys(params, path,
             {"n_atoms", "eta", "u0", "kappa", "delta_c", "temp_init", "dt",
              "noise_on"});
  for (const auto& [key, value] : params.items()) {
    const std::string where = path + "." + key;
    if (key == "n_atoms") {
      s.params.n_atoms = int_at(value, where, 1);
    } else if (key == "eta") {
      s.params.eta = number_at(value, where);
    } else if (key == "u0") {
      const double v = number_at(value, where);
      if (!(v <= 0.0)) throw ConfigError(where + ": must be <= 0");
      s.params.u0 = v;
    } else if (key == "kappa") {
      s.params.kappa = positive_at(value, where);
    } else if (key == "delta_c") {
      s.params.delta_c = number_at(value, where);
    } else if (key == "temp_init") {
      s.params.temp_init = positive_at(value, where);
    } else if (key == "dt") {
      s.params.dt = positive_at(value, where);
    } else if (key == "noise_on") {
      s.params.noise_on = bool_at(value, where);
    }
  }
}

void apply_integrator_overrides(Scenario& s, const json& integrator) {
  const std::string path = "integrator";
  check_keys(integrator, path, {"scheme", "t_end", "record_stride"});
  if (integrator.contains("scheme")) {
    const auto& v = integrator.at("scheme");
    if (!v.is_string()) throw ConfigError(path + ".scheme: expected a string");
    try {
      s.cfg.scheme = scheme_from_string(v.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(path + ".scheme: " + e.what());
    }
  }
  if (integrator.contains("t_end"))
    retime(s, positive_at(integrator.at("t_end"), path + ".t_end"));
  if (integrator.contains("record_stride"))
    s.cfg.record_stride = int_at(integrator.at("record_stride"), path + ".record_stride", 1);
  else
    s.cfg.record_stride = record_stride_for(s.cfg.t_end, s.params.dt);
}

void apply_ensemble_overrides(Scenario& s, const json& ensemble) {
  const std::string path = "ensemble";
  check_keys(ensemble, path, {"n_init", "n_noise"});
  if (ensemble.contains("n_init"))
    s.spec.n_init = int_at(ensemble.at("n_init"), path + ".n_init", 1);
  if (ensemble.contains("n_noise"))
    s.spec.n_noise = int_at(ensemble.at("n_noise"), path + ".n_noise", 1);
}

ScenarioSet scenario_set_from_json(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ConfigError("scenario: unknown scenario '" + name + "'");
    return make_scenario_set(name);
  }
  if (!j.is_object()) throw ConfigError("scenario: expected a name or an object");
  if (j.contains("members")) {
    check_keys(j, "scenario", {"name", "members"});
    if (!j.contains("name") || !j.at("name").is_string())
      throw ConfigError("scenario.name: expected a string");
    const auto& members = j.at("members");
    if (!members.is_array() || members.empty())
      throw ConfigError("scenario.members: expected a non-empty array");
    ScenarioSet set{j.at("name").get<std::string>(), {}};
    for (std::size_t k = 0; k < members.size(); ++k)
      set.members.push_back(
          scenario_from_json(members[k], "scenario.members[" + std::to_string(k) + "]"));
    return set;
  }
  Scenario s = scenario_from_json(j, "scenario");
  return {s.name, {s}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw OutputError("failed writing " + path.string());
}

std::string csv_line(std::initializer_list<double> values) {
  std::string line;
  bool first = true;
  for (double v : values) {
    if (!first) line += ',';
    line += format_double(v);
    first = false;
  }
  line += '\n';
  return line;
}

std::string histogram_file_name(double t) {
  return "histogram_t" + format_double(t) + ".csv";
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw OutputError("number formatting failed");
  return std::string(buf, end);
}

RunConfig parse_config(std::string_view text, const CliOverrides& cli) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, "", kTopLevelKeys);
  if (!doc.contains("scenario")) throw ConfigError("scenario: missing field");

  RunConfig config;
  const auto mark = [&](const std::string& field, bool user, bool from_cli = false) {
    config.provenance[field] = from_cli ? "cli" : (user ? "user" : "default");
  };

  const json& scenario = doc.at("scenario");
  config.source = scenario.is_string() ? scenario.get<std::string>()
                  : doc.contains("schema_version") ? "manifest"
                                                   : "inline";
  ScenarioSet set = scenario_set_from_json(scenario);
  mark("scenario", true);

  if (doc.contains("schema_version")) {
    const auto v = integer_at(doc.at("schema_version"), "schema_version");
    if (v != kSchemaVersion)
      throw ConfigError("schema_version: unsupported version " + std::to_string(v));
  }

  for (auto& member : set.members) {
    if (doc.contains("params")) apply_param_overrides(member, doc.at("params"));
    if (doc.contains("integrator"))
      apply_integrator_overrides(member, doc.at("integrator"));
    else if (doc.contains("params") && !scenario.is_object())
      member.cfg.record_stride = record_stride_for(member.cfg.t_end, member.params.dt);
    if (doc.contains("ensemble")) apply_ensemble_overrides(member, doc.at("ensemble"));
  }
  for (const char* section : {"params", "integrator", "ensemble"})
    if (doc.contains(section))
      for (const auto& [key, value] : doc.at(section).items())
        mark(std::string(section) + "." + key, true);

  if (doc.contains("scale")) {
    check_keys(doc.at("scale"), "scale", {"ensemble", "time", "atoms"});
    const auto& sc = doc.at("scale");
    if (sc.contains("ensemble")) config.scale.ensemble = positive_at(sc.at("ensemble"), "scale.ensemble");
    if (sc.contains("time")) config.scale.time = positive_at(sc.at("time"), "scale.time");
    if (sc.contains("atoms")) config.scale.atoms = positive_at(sc.at("atoms"), "scale.atoms");
  }
  mark("scale.ensemble", doc.contains("scale") && doc["scale"].contains("ensemble"),
       cli.scale_ensemble.has_value());
  mark("scale.time", doc.contains("scale") && doc["scale"].contains("time"),
       cli.scale_time.has_value());
  mark("scale.atoms", doc.contains("scale") && doc["scale"].contains("atoms"),
       cli.scale_atoms.has_value());
  if (cli.scale_ensemble) config.scale.ensemble = *cli.scale_ensemble;
  if (cli.scale_time) config.scale.time = *cli.scale_time;
  if (cli.scale_atoms) config.scale.atoms = *cli.scale_atoms;
  try {
    config.scale.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("scale: ") + e.what());
  }

  if (doc.contains("master_seed")) {
    const auto& v = doc.at("master_seed");
    if (!v.is_number_unsigned())
      throw ConfigError("master_seed: expected a non-negative integer");
    config.master_seed = v.get<std::uint64_t>();
  }
  mark("master_seed", doc.contains("master_seed"), cli.seed.has_value());
  if (cli.seed) config.master_seed = *cli.seed;

  if (doc.contains("workers")) config.workers = int_at(doc.at("workers"), "workers", 0);
  mark("workers", doc.contains("workers"), cli.workers.has_value());
  if (cli.workers) {
    if (*cli.workers < 0) throw ConfigError("workers: must be >= 0");
    config.workers = *cli.workers;
  }

  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string())
      throw ConfigError("output_dir: expected a string");
    config.output_dir = doc.at("output_dir").get<std::string>();
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    config.output_dir = env;
  } else {
    config.output_dir = std::string(kDefaultOutputDir);
  }
  mark("output_dir", doc.contains("output_dir"), cli.output_dir.has_value());
  if (cli.output_dir) config.output_dir = *cli.output_dir;

  if (doc.contains("force")) config.force = bool_at(doc.at("force"), "force");
  mark("force", doc.contains("force"), cli.force);
  config.force = config.force || cli.force;

  for (auto& member : set.members) {
    apply_scale(member, config.scale);
    if (config.master_seed) member.spec.master_seed += *config.master_seed;
    try {
      member.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("scenario " + member.name + ": " + e.what());
    }
  }
  config.scenarios = std::move(set);

  // A replayed manifest keeps the origin it recorded.
  if (doc.contains("schema_version")) {
    if (doc.contains("source") && doc.at("source").is_string())
      config.source = doc.at("source").get<std::string>();
    if (doc.contains("provenance")) {
      try {
        config.provenance = doc.at("provenance").get<std::map<std::string, std::string>>();
      } catch (const json::exception&) {
        throw ConfigError("provenance: expected an object of strings");
      }
    }
  }
  return config;
}

RunConfig config_for_scenario(std::string_view name, const CliOverrides& cli) {
  json doc{{"scenario", std::string(name)}};
  return parse_config(doc.dump(), cli);
}

json config_echo(const RunConfig& config) {
  json members = json::array();
  for (const auto& m : config.scenarios.members) members.push_back(to_json(m));
  return json{
      {"scenario", {{"name", config.scenarios.name}, {"members", members}}},
  };
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw OutputError(path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) throw OutputError(path.string() + ": bad number");
      row.push_back(v);
      p = next;
      if (p < end && *p == ',') ++p;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void check_output_dir(const RunConfig& config) {
  const fs::path& root = config.output_dir;
  std::error_code ec;
  if (fs::exists(root, ec) && !fs::is_directory(root, ec))
    throw ConfigError("output_dir: " + root.string() + " is not a directory");
  if (fs::exists(root, ec) && !fs::is_empty(root, ec) && !config.force)
    throw ConfigError("output_dir: " + root.string() +
                      " is not empty (use --force to overwrite)");
}

std::vector<fs::path> write_member(const fs::path& root, const Scenario& scenario,
                                   const EnsembleResult& result) {
  std::vector<fs::path> files;
  const fs::path rel = scenario.name;
  const fs::path dir = root / rel;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create " + dir.string() + ": " + ec.message());

  {
    std::string text =
        "t,theta_mean,theta_std,bunching_mean,bunching_std,photon_number_mean,"
        "odd_fraction\n";
    for (const auto& a : result.aggregate)
      text += csv_line({a.t, a.theta_mean, a.theta_std, a.bunching_mean,
                        a.bunching_std, a.photon_number_mean, a.odd_fraction});
    write_text(dir / "aggregate.csv", text);
    files.push_back(rel / "aggregate.csv");
  }

  for (double t : scenario.outputs.histogram_times) {
    const Histogram h = position_histogram(result, t, scenario.outputs.histogram_bins);
    std::string text = "bin_center,density\n";
    for (std::size_t b = 0; b < h.density.size(); ++b)
      text += csv_line({h.bin_centers[b], h.density[b]});
    write_text(dir / histogram_file_name(t), text);
    files.push_back(rel / histogram_file_name(t));
  }

  if (scenario.outputs.write_trajectories) {
    fs::create_directories(dir / "trajectories", ec);
    if (ec) throw OutputError("cannot create " + (dir / "trajectories").string());
    for (const auto& tr : result.trajectories) {
      std::string text = "t,theta,bunching,photon_number,re_alpha,im_alpha\n";
      for (const auto& r : tr.records)
        text += csv_line({r.t, r.theta, r.bunching, r.photon_number, r.re_alpha,
                          r.im_alpha});
      const std::string name = "traj_" + std::to_string(tr.init_index) + "_" +
                               std::to_string(tr.noise_index) + ".csv";
      write_text(dir / "trajectories" / name, text);
      files.push_back(rel / "trajectories" / name);
    }
  }

  const double t_final = result.aggregate.back().t;
  const double odd = odd_fraction(result, t_final);
  json summary{
      {"schema_version", kSchemaVersion},
      {"scenario", to_json(scenario)},
      {"n_trajectories", result.trajectories.size()},
      {"t_final", t_final},
      {"final_theta", result.final_theta()},
      {"final_bunching", result.final_bunching()},
      {"odd_fraction", odd},
      {"sign_fractions", {{"even", 1.0 - odd}, {"odd", odd}}},
      {"histogram_times", scenario.outputs.histogram_times},
  };
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  files.push_back(rel / "summary.json");
  return files;
}

namespace {

void clear_previous(const RunConfig& config) {
  if (!config.force) return;
  std::error_code ec;
  fs::remove(config.output_dir / "manifest.json", ec);
  fs::remove(config.output_dir / "run_info.json", ec);
  for (const auto& m : config.scenarios.members)
    fs::remove_all(config.output_dir / m.name, ec);
}

OutputBundle finish_bundle(const RunConfig& config, std::vector<fs::path> files,
                           double wall_time_seconds) {
  std::sort(files.begin(), files.end());
  json file_list = json::array();
  for (const auto& f : files) file_list.push_back(f.generic_string());

  json manifest = config_echo(config);
  manifest["schema_version"] = kSchemaVersion;
  manifest["code_version"] = std::string(kCodeVersion);
  manifest["source"] = config.source;
  manifest["provenance"] = config.provenance;
  manifest["files"] = file_list;
  write_text(config.output_dir / "manifest.json", manifest.dump(2) + "\n");

  // Everything that legitimately varies between identical runs goes here.
  json info{{"wall_time_seconds", wall_time_seconds}, {"workers", config.workers}};
  write_text(config.output_dir / "run_info.json", info.dump(2) + "\n");

  files.insert(files.begin(), "manifest.json");
  return {config.output_dir, std::move(files)};
}

}  // namespace

OutputBundle write_outputs(const RunConfig& config,
                           const std::vector<MemberResult>& members,
                           double wall_time_seconds) {
  check_output_dir(config);
  clear_previous(config);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw OutputError("cannot create " + config.output_dir.string());
  std::vector<fs::path> files;
  for (const auto& m : members) {
    auto written = write_member(config.output_dir, *m.scenario, *m.result);
    files.insert(files.end(), written.begin(), written.end());
  }
  return finish_bundle(config, std::move(files), wall_time_seconds);
}

OutputBundle run_config(const RunConfig& config) {
  check_output_dir(config);
  clear_previous(config);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw OutputError("cannot create " + config.output_dir.string());

  const auto start = std::chrono::steady_clock::now();
  std::vector<fs::path> files;
  EnsembleOptions options;
  options.workers = config.workers;
  for (const auto& member : config.scenarios.members) {
    const EnsembleResult result = run_ensemble(member.params, member.schedule,
                                               member.cfg, member.spec, options);
    auto written = write_member(config.output_dir, member, result);
    files.insert(files.end(), written.begin(), written.end());
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish_bundle(config, std::move(files), wall);
}

}  // namespace cavityseed
