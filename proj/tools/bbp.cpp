#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bbp/commands.hpp"

int main(int argc, char** argv) {
  using namespace bbp::cli;
  CLI::App app{"Spiked Wigner matrices under entrywise transforms: predictions and Monte Carlo"};
  app.require_subcommand(1);

  Options opt;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--set", opt.overrides, "Config override key=value (repeatable)");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--workers", workers, "Worker threads (default: BBP_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "Output directory");
    cmd->add_flag("--canonical", opt.canonical, "Write wall-time fields as 0");
  };

  std::string config;
  std::string results;
  std::string name;

  auto* predict_cmd = app.add_subcommand("predict", "Print the theory prediction for a config");
  predict_cmd->add_option("config", config, "JSON config (optional)");
  add_common(predict_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  simulate_cmd->add_option("config", config, "JSON config")->required();
  add_common(simulate_cmd);

  auto* analyze_cmd = app.add_subcommand("analyze", "Summarize a results CSV against its config");
  analyze_cmd->add_option("results", results, "results.csv")->required();
  analyze_cmd->add_option("config", config, "JSON config")->required();
  add_common(analyze_cmd);

  auto* figure_cmd = app.add_subcommand("figure", "Run a figure preset (2a, 2b, 3a, 3b)");
  figure_cmd->add_option("name", name, "Figure name")->required()->check(CLI::IsMember({"2a", "2b", "3a", "3b"}));
  add_common(figure_cmd);

  auto* validate_cmd = app.add_subcommand("validate", "Run an invariant suite");
  validate_cmd->add_option("suite", name, "rank2, qve, local-law, approx, interp or all")
      ->required()
      ->check(CLI::IsMember({"rank2", "qve", "local-law", "approx", "interp", "all"}));
  add_common(validate_cmd);

  auto* tw_cmd = app.add_subcommand("tw-table", "Regenerate or check the Tracy-Widom table");
  tw_cmd->add_option("action", name, "regen or check")->required()->check(CLI::IsMember({"regen", "check"}));
  add_common(tw_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }

  auto* cmd = app.get_subcommands().front();
  if (cmd->count("--seed")) opt.seed = seed;
  if (cmd->count("--workers")) opt.workers = workers;
  if (cmd->count("--out")) opt.out = out;

  return guarded(
      [&] {
        if (cmd == predict_cmd) return predict(config, opt, std::cout);
        if (cmd == simulate_cmd) return simulate(config, opt, std::cout);
        if (cmd == analyze_cmd) return analyze(results, config, opt, std::cout);
        if (cmd == figure_cmd) return figure(name, opt, std::cout);
        if (cmd == validate_cmd) return validate(name, opt, std::cout);
        return tw_table(name, opt, std::cout);
      },
      std::cerr);
}
