#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "runner.hpp"

using namespace mdim::cli;

namespace {

struct Overrides {
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--jobs", o.jobs, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "Root seed, overrides the config");
  app->add_option("--out", o.out, "Output directory, overrides the config");
}

void apply(ExperimentConfig& cfg, const Overrides& o) {
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
}

int execute(const ExperimentConfig& cfg) {
  std::cerr << "config " << config_hash(cfg) << " seed " << cfg.seed << " -> " << cfg.out << "\n";
  const auto outcome = run_experiment(cfg, std::cerr);
  for (const auto& w : outcome.warnings) std::cerr << "warning: degraded task " << w << "\n";
  for (const auto& f : outcome.files) std::cout << cfg.out << "/" << f << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean dimension and entropy estimators for dynamical systems"};
  app.require_subcommand(1);

  Overrides run_o, verify_o, example_o;
  std::string run_path, verify_path;
  std::string eps_ladder;
  std::optional<int> example_window;

  auto* run = app.add_subcommand("run", "Run the tasks of a config file");
  run->add_option("config", run_path, "INI config")->required();
  add_common(run, run_o);

  auto* verify = app.add_subcommand("verify", "Run the inequality suite with a config's settings");
  verify->add_option("config", verify_path, "INI config")->required();
  add_common(verify, verify_o);

  auto* example = app.add_subcommand("example", "Reproduce the interval shift example");
  example->add_option("--eps-ladder", eps_ladder, "eps values, e.g. '2^-3..2^-6'");
  example->add_option("--window", example_window, "Coordinate window [-w, w]")->check(CLI::PositiveNumber);
  add_common(example, example_o);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (run->parsed()) {
      cfg = load_config(run_path);
      if (cfg.tasks.empty()) throw ConfigError(run_path, 0, "missing mandatory key 'tasks'");
      apply(cfg, run_o);
    } else if (verify->parsed()) {
      cfg = load_config(verify_path);
      cfg.tasks = {"verify"};
      apply(cfg, verify_o);
    } else {
      cfg.seed = 1;
      cfg.out = "out/example";
      cfg.tasks = {"example"};
      cfg.eps = parse_real_list("2^-3..2^-7");
      cfg.n = parse_int_list("2..10");
      cfg.bk_n = cfg.n;
      if (!eps_ladder.empty()) {
        try {
          cfg.example_eps = parse_real_list(eps_ladder);
        } catch (const std::exception& e) {
          throw ConfigError("--eps-ladder", 0, e.what());
        }
      }
      if (example_window) cfg.example_window = *example_window;
      apply(cfg, example_o);
    }
    return execute(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
