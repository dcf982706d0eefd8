// Command-line driver: run, validate and sweep experiments from a config file.

#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "surfpf/sim.hpp"

namespace {

using namespace surfpf;

struct Common {
  std::string config;
  std::string preset;
  bool full = false;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "Config file (section.key = value lines)");
  cmd->add_option("--preset", c.preset, "Start from a named preset instead of a file");
  cmd->add_flag("--full", c.full, "Use the long schedules and finer meshes");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--seed", c.seed, "Seed for random initial data");
}

RunConfig load(const Common& c) {
  if (c.config.empty() == c.preset.empty()) throw ConfigError("give either a config file or --preset NAME");
  RunConfig config = c.config.empty() ? parse_config("run.experiment = " + c.preset + "\n", c.full)
                                      : load_config(c.config, c.full);
  if (!c.out.empty()) config.out_dir = c.out;
  if (c.seed) config.seed = *c.seed;
  return config;
}

std::vector<double> parse_betas(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--beta: '" + item + "' is not a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Allen-Cahn and Cahn-Hilliard simulations on implicit surfaces"};
  app.require_subcommand(0, 1);

  Common run_opts, validate_opts, sweep_opts;
  std::string levels, betas;
  CLI::App* run = app.add_subcommand("run", "Run the experiment named in the config");
  add_common(run, run_opts);
  CLI::App* validate = app.add_subcommand("validate", "Manufactured-solution convergence study");
  add_common(validate, validate_opts);
  validate->add_option("--levels", levels, "Refinement levels, e.g. 2..4");
  CLI::App* sweep = app.add_subcommand("sweep", "Stability sweep over beta_s");
  add_common(sweep, sweep_opts);
  sweep->add_option("--beta", betas, "Comma-separated beta_s values");
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "Print every accepted config key and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (list_keys) {
    for (const auto& k : config_keys()) std::printf("%s\n", k.c_str());
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::fprintf(stderr, "%s", app.help().c_str());
    return 2;
  }

  try {
    if (*run) return run_experiment(load(run_opts));
    if (*validate) {
      RunConfig config = load(validate_opts);
      if (config.experiment != Experiment::AcValidation && config.experiment != Experiment::ChValidation)
        config.experiment = config.model == Model::AllenCahn ? Experiment::AcValidation : Experiment::ChValidation;
      if (!levels.empty()) apply_entry(config, "validation.levels", levels);
      config.validate();
      return run_experiment(config);
    }
    RunConfig config = load(sweep_opts);
    config.experiment = Experiment::BetaSweep;
    if (!betas.empty()) config.betas = parse_betas(betas);
    config.validate();
    return run_experiment(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for_exception(e);
  }
}
