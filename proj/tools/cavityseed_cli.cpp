// Command-line front end: run catalog scenarios or config files, list the
// catalog, validate configs.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cavityseed/io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cavityseed::ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

cavityseed::RunConfig resolve(const std::string& target,
                              const cavityseed::CliOverrides& cli) {
  const auto& names = cavityseed::scenario_names();
  if (std::find(names.begin(), names.end(), target) != names.end())
    return cavityseed::config_for_scenario(target, cli);
  return cavityseed::parse_config(read_file(target), cli);
}

void print_warnings(const cavityseed::RunConfig& config) {
  for (const auto& m : config.scenarios.members)
    for (const auto& w : m.params.validate())
      std::cerr << "warning: " << m.name << ": " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical cavity self-organisation and pattern seeding simulator"};
  app.require_subcommand(1);

  std::string target;
  cavityseed::CliOverrides cli;
  std::uint64_t seed = 0;
  std::string out_dir;
  int workers = 0;
  double scale_ensemble = 1.0;
  double scale_time = 1.0;
  double scale_atoms = 1.0;

  auto* run = app.add_subcommand("run", "run a catalog scenario or a JSON config");
  run->add_option("target", target, "scenario name or config path")->required();
  auto* seed_opt = run->add_option("--seed", seed, "master seed");
  auto* out_opt = run->add_option("--out", out_dir,
                                  "output directory (default $CAVITYSEED_OUT_DIR "
                                  "or ./cavityseed-out)");
  auto* workers_opt =
      run->add_option("--workers", workers, "worker threads (0: all cores)");
  auto* se_opt = run->add_option("--scale-ensemble", scale_ensemble,
                                 "multiply the number of initial conditions");
  auto* st_opt = run->add_option("--scale-time", scale_time,
                                 "multiply t_end and all switch times");
  auto* sa_opt = run->add_option("--scale-atoms", scale_atoms,
                                 "multiply N, keeping sqrt(N)*eta and N*U0 fixed");
  run->add_flag("--force", cli.force, "overwrite a non-empty output directory");

  auto* list = app.add_subcommand("list-scenarios", "list catalog scenarios");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "validate a JSON config");
  validate->add_option("config", validate_path, "config path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& name : cavityseed::scenario_names())
        std::cout << name << "\t" << cavityseed::scenario_description(name) << "\n";
      return 0;
    }

    if (*validate) {
      const auto config = cavityseed::parse_config(read_file(validate_path));
      print_warnings(config);
      std::cout << "ok: " << config.scenarios.members.size() << " scenario(s) in '"
                << config.scenarios.name << "'\n";
      return 0;
    }

    if (*seed_opt) cli.seed = seed;
    if (*out_opt) cli.output_dir = out_dir;
    if (*workers_opt) cli.workers = workers;
    if (*se_opt) cli.scale_ensemble = scale_ensemble;
    if (*st_opt) cli.scale_time = scale_time;
    if (*sa_opt) cli.scale_atoms = scale_atoms;

    const auto config = resolve(target, cli);
    print_warnings(config);
    cavityseed::check_output_dir(config);
    const auto bundle = cavityseed::run_config(config);
    std::cout << "wrote " << bundle.files.size() << " files to "
              << bundle.root.string() << "\n";
    return 0;
  } catch (const cavityseed::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
