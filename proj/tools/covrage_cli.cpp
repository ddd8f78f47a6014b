// covrage: plan, sweep, map and compare multi-beam AWVs from scenario configs.
//
// Exit codes: 0 success, 2 configuration error, 3 model-domain error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;

struct Overrides {
  std::string config;
  std::string out_dir;
  std::string strategy;
  std::string ablation;
  std::optional<std::uint64_t> seed;
  int resolution = 256;
};

covrage::cli::LoadedConfig resolve(const Overrides& o) {
  covrage::cli::LoadedConfig cfg = covrage::cli::load_config(o.config);
  covrage::Scenario& sc = cfg.scenario;
  if (!o.strategy.empty()) sc.strategy = covrage::parse_strategy(o.strategy);
  if (!o.ablation.empty()) sc.ablation = covrage::parse_ablation(o.ablation);
  if (o.seed) sc.seed = *o.seed;
  sc.validate();
  return cfg;
}

std::string out_dir(const Overrides& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("COVRAGE_OUT_DIR"); env && *env) return env;
  return "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-beam mmWave receive beamforming for head-mounted displays"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Scenario YAML file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", o.out_dir, "Output directory (default: $COVRAGE_OUT_DIR or ./out)");
    cmd->add_option("--seed", o.seed, "Override the scenario seed");
  };
  auto selection = [&o](CLI::App* cmd) {
    cmd->add_option("--strategy", o.strategy, "covrage | baseline-start | baseline-edge | baseline-mid");
    cmd->add_option("--ablation", o.ablation, "none | no-sync | delayed-first");
  };

  CLI::App* plan = app.add_subcommand("plan", "Plan the covering beam and dump its AWV");
  common(plan);
  plan->add_option("--ablation", o.ablation, "none | no-sync | delayed-first");
  CLI::App* sweep = app.add_subcommand("sweep", "Gain, noise penalty and MCS along the trajectory");
  common(sweep);
  selection(sweep);
  CLI::App* gainmap = app.add_subcommand("gainmap", "Gain over the UV disc");
  common(gainmap);
  selection(gainmap);
  gainmap->add_option("--resolution", o.resolution, "Grid cells per side (>= 16)")->capture_default_str();
  CLI::App* compare = app.add_subcommand("compare", "All strategies and ablations on one scenario");
  common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const covrage::cli::LoadedConfig cfg = resolve(o);
    const std::string dir = out_dir(o);
    if (plan->parsed()) covrage::cli::cmd_plan(cfg, dir, std::cout);
    else if (sweep->parsed()) covrage::cli::cmd_sweep(cfg, dir, std::cout);
    else if (gainmap->parsed()) covrage::cli::cmd_gainmap(cfg, dir, o.resolution, std::cout);
    else if (compare->parsed()) covrage::cli::cmd_compare(cfg, dir, std::cout);
  } catch (const covrage::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const covrage::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
