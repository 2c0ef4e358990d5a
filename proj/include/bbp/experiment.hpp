#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbp/ensemble.hpp"
#include "bbp/noise.hpp"
#include "bbp/spectra.hpp"
#include "bbp/theory.hpp"
#include "bbp/transform.hpp"

namespace bbp {

using json = nlohmann::json;

struct NoiseSpec {
  std::string type = "gaussian";  ///< gaussian | mixture | custom
  double a = 0.4472135954999579;  ///< mixture Gaussian weight, default 1/sqrt5
  double b = 0.8944271909999159;  ///< mixture atom, default 2/sqrt5
  std::string name;               ///< custom preset name
  NoiseModel build() const;
};

struct TransformSpec {
  std::string type = "identity";  ///< identity | polynomial | optimal | preset
  std::vector<double> coeffs;
  std::string name;
  bool normalize = true;
  Transform build(const NoiseModel& model) const;
};

struct OutputSpec {
  std::string path = "out";
  std::string format = "csv";  ///< csv | json
};

struct ExperimentConfig {
  Eigen::Index N = 1024;
  int trials = 1;
  double lambda = 0.0;
  std::optional<double> lambda0;  ///< set together with `scaled`
  bool scaled = false;
  NoiseSpec noise;
  TransformSpec transform;
  SpikePrior prior;
  std::string regime = "auto";  ///< auto | supercritical | subcritical
  std::uint64_t master_seed = 0;
  int workers = 0;  ///< 0: BBP_WORKERS or hardware concurrency
  bool compute_mu2 = false;
  double margin = 0.05;
  double zero_threshold = 1e-8;
  OutputSpec outputs;

  /// Rejects unknown keys at every level.
  static ExperimentConfig from_json(const json& j);
  json to_json() const;
};

/// Applies `key=value` overrides (dotted keys, JSON-parsed values) to a raw
/// config document.
void apply_override(json& doc, const std::string& assignment);

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

int resolve_workers(int requested);

/// Objects built from a config, shared read-only by all trials.
struct ResolvedExperiment {
  NoiseModel noise;
  Transform transform;
  TransformMoments moments;
  SpikePrior prior;
  double lambda = 0.0;  ///< SNR actually used (lambda0 sqrt(N) when scaled)
  TheoryPrediction prediction;
};

ResolvedExperiment resolve(const ExperimentConfig& config);

struct TrialRecord {
  std::int64_t trial = 0;
  double mu1 = 0.0;
  double mu2 = 0.0;  ///< NaN when not requested
  double rescaled = 0.0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  bool ok = true;
};

/// Runs all trials. Output is ordered by trial index and independent of the
/// worker count. Throws NumericalError when more than 1% of trials fail.
std::vector<TrialRecord> run(const ExperimentConfig& config);
std::vector<TrialRecord> run(const ExperimentConfig& config, const ResolvedExperiment& setup);

/// One trial: sample, transform, top eigenvalues.
TrialRecord run_trial(const ExperimentConfig& config, const ResolvedExperiment& setup,
                      std::int64_t index);

/// sup |F_emp - F_ref| via the sorted-sample formula.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Fraction of trials with |mu1 - centering| > c N^{scale_exponent + epsilon}.
double rigidity_exceedance(std::span<const TrialRecord> records, const TheoryPrediction& p,
                           Eigen::Index N, double epsilon, double c);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::vector<double> ref_density;  ///< reference density at bin centers, empty without theory
};

/// Freedman-Diaconis binning when `bins` is 0.
Histogram make_histogram(std::span<const double> samples, std::size_t bins = 0,
                         const ReferenceLaw* law = nullptr);

struct AnalysisSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;
  double skew = 0.0;
  std::optional<double> ks;
  Histogram histogram;
  double epsilon = 0.2;
  double c = 1.0;
  double exceedance = 0.0;
  Regime regime = Regime::no_theory;
  double location = 0.0;
  ReferenceLaw reference;
};

struct SummaryOptions {
  double epsilon = 0.2;
  double c = 1.0;
  std::size_t bins = 0;
};

AnalysisSummary summarize(std::span<const TrialRecord> records, const TheoryPrediction& p,
                          Eigen::Index N, const SummaryOptions& options = {});

json summary_to_json(const AnalysisSummary& s);

/// `trial,mu1,mu2,rescaled,seed,wall_ms`; canonical mode writes wall_ms as 0.
void write_records_csv(const std::filesystem::path& path, std::span<const TrialRecord> records,
                       bool canonical = false);
std::vector<TrialRecord> read_records_csv(const std::filesystem::path& path);

/// `bin_left,bin_right,count,ref_density`
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);

void write_json(const std::filesystem::path& path, const json& j);

}  // namespace bbp
