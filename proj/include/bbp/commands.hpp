#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bbp/experiment.hpp"

namespace bbp::cli {

enum ExitCode : int { ok = 0, config_error = 1, numerical_failure = 2, acceptance_failure = 3 };

struct Options {
  std::vector<std::string> overrides;  ///< key=value
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::filesystem::path> out;
  bool canonical = false;
};

/// Config file (or an empty document when `path` is empty) with overrides and
/// the --seed / --workers / --out flags applied.
ExperimentConfig effective_config(const std::filesystem::path& path, const Options& options);

/// Theory summary for a config. Throws NearCriticalError near lambda_e = 1.
json predict_report(const ExperimentConfig& config);

/// Parameter sets of the published figures: 2a, 2b, 3a, 3b.
ExperimentConfig figure_preset(const std::string& name);
std::vector<std::string> figure_names();

int predict(const std::filesystem::path& config, const Options& options, std::ostream& out);
int simulate(const std::filesystem::path& config, const Options& options, std::ostream& out);
int analyze(const std::filesystem::path& results, const std::filesystem::path& config, const Options& options,
            std::ostream& out);
int figure(const std::string& name, const Options& options, std::ostream& out);
/// Suites: rank2, qve, local-law, approx, interp, all.
int validate(const std::string& suite, const Options& options, std::ostream& out);
/// Actions: regen (write a fresh table to --out), check (compare with the shipped table).
int tw_table(const std::string& action, const Options& options, std::ostream& out);

/// Runs `body`, mapping ConfigError to 1 and NumericalError to 2 with the
/// message on `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace bbp::cli
