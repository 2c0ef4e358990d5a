#include "bbp/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bbp/error.hpp"
#include "bbp/theory.hpp"
#include "bbp/validation.hpp"

namespace bbp::cli {

namespace fs = std::filesystem;

namespace {

json law_json(const ReferenceLaw& law) {
  json j = {{"name", law.name()}};
  if (law.kind != ReferenceLaw::Kind::none) {
    j["mean"] = law.mean;
    j["variance"] = law.variance;
  }
  return j;
}

fs::path output_dir(const ExperimentConfig& config) {
  fs::path dir = config.outputs.path;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string hex32(unsigned long v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", v);
  return buf;
}

void write_results(const fs::path& dir, const ExperimentConfig& config, const std::vector<TrialRecord>& records,
                   const AnalysisSummary& summary, bool canonical) {
  if (config.outputs.format == "json") {
    json rows = json::array();
    for (const auto& r : records) {
      auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
      rows.push_back({{"trial", r.trial},
                      {"mu1", num(r.mu1)},
                      {"mu2", num(r.mu2)},
                      {"rescaled", num(r.rescaled)},
                      {"seed", r.seed},
                      {"wall_ms", canonical ? 0.0 : r.wall_ms}});
    }
    write_json(dir / "results.json", rows);
  } else {
    write_records_csv(dir / "results.csv", records, canonical);
  }
  write_json(dir / "summary.json", summary_to_json(summary));
  write_histogram_csv(dir / "histogram.csv", summary.histogram);
}

int run_and_write(const ExperimentConfig& config, const Options& options, std::ostream& out) {
  const ResolvedExperiment setup = resolve(config);
  const fs::path dir = output_dir(config);
  write_json(dir / "effective_config.json", config.to_json());
  const auto records = run(config, setup);
  const AnalysisSummary summary = summarize(records, setup.prediction, config.N);
  write_results(dir, config, records, summary, options.canonical);
  out << summary_to_json(summary).dump(2) << '\n';
  return ok;
}

}  // namespace

ExperimentConfig effective_config(const fs::path& path, const Options& options) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
  }
  for (const auto& o : options.overrides) apply_override(doc, o);
  ExperimentConfig c = ExperimentConfig::from_json(doc);
  if (options.seed) c.master_seed = *options.seed;
  if (options.workers) c.workers = *options.workers;
  if (options.out) c.outputs.path = options.out->string();
  return c;
}

json predict_report(const ExperimentConfig& config) {
  const NoiseModel noise = config.noise.build();
  const Transform t = config.transform.build(noise);
  const TransformMoments m = compute_moments(t, noise);
  check_normalized(m);
  TheoryPrediction p;
  json j;
  if (config.scaled) {
    p = predict_scaled(*config.lambda0, m, config.prior.fourth_moment(), config.margin, config.zero_threshold);
    j["lambda0"] = *config.lambda0;
    j["C2"] = scaled_c2(m);
  } else {
    p = predict(config.lambda, m, config.margin);
    j["lambda"] = config.lambda;
  }
  j["effective_snr"] = p.effective_snr;
  j["regime"] = to_string(p.regime);
  j["location"] = p.location;
  j["scale_exponent"] = p.scale_exponent;
  j["reference"] = law_json(p.law);
  j["shift"] = p.shift;
  j["edge_offset"] = p.edge_offset;
  j["detection_threshold"] = p.detection_threshold > 0.0 ? json(p.detection_threshold) : json(nullptr);
  j["critical_index"] = critical_index(m, config.zero_threshold);
  j["E_f_derivatives"] = {m.derivative[1], m.derivative[2], m.derivative[3]};
  return j;
}

std::vector<std::string> figure_names() { return {"2a", "2b", "3a", "3b"}; }

ExperimentConfig figure_preset(const std::string& name) {
  ExperimentConfig c;
  c.N = 1024;
  c.trials = 5000;
  c.prior = SpikePrior::rademacher();
  if (name == "2a" || name == "2b") {
    c.noise.type = "mixture";
    c.transform.type = "optimal";
    c.lambda = name == "2a" ? 0.8 : 0.1;
  } else if (name == "3a" || name == "3b") {
    c.noise.type = "gaussian";
    c.transform.type = "preset";
    c.transform.name = "quadratic";
    c.lambda = name == "3a" ? 2.5 : 0.1;
  } else {
    throw ConfigError("unknown figure '" + name + "' (expected 2a, 2b, 3a or 3b)");
  }
  c.master_seed = name == "2a" ? 201 : name == "2b" ? 202 : name == "3a" ? 301 : 302;
  c.outputs.path = "figure-" + name;
  return c;
}

int predict(const fs::path& config_path, const Options& options, std::ostream& out) {
  const ExperimentConfig config = effective_config(config_path, options);
  const json report = predict_report(config);
  if (options.out) {
    const fs::path dir = output_dir(config);
    write_json(dir / "effective_config.json", config.to_json());
    write_json(dir / "prediction.json", report);
  }
  out << report.dump(2) << '\n';
  return ok;
}

int simulate(const fs::path& config_path, const Options& options, std::ostream& out) {
  return run_and_write(effective_config(config_path, options), options, out);
}

int analyze(const fs::path& results, const fs::path& config_path, const Options& options, std::ostream& out) {
  const ExperimentConfig config = effective_config(config_path, options);
  const ResolvedExperiment setup = resolve(config);
  const auto records = read_records_csv(results);
  if (records.empty()) throw ConfigError("no records in " + results.string());
  const AnalysisSummary summary = summarize(records, setup.prediction, config.N);
  const json j = summary_to_json(summary);
  if (options.out) {
    const fs::path dir = output_dir(config);
    write_json(dir / "effective_config.json", config.to_json());
    write_json(dir / "summary.json", j);
    write_histogram_csv(dir / "histogram.csv", summary.histogram);
  }
  out << j.dump(2) << '\n';
  return ok;
}

int figure(const std::string& name, const Options& options, std::ostream& out) {
  if (!options.overrides.empty())
    throw ConfigError("figure presets are fixed; use simulate with a config to change parameters");
  ExperimentConfig config = figure_preset(name);
  if (options.seed) config.master_seed = *options.seed;
  if (options.workers) config.workers = *options.workers;
  if (options.out) config.outputs.path = options.out->string();
  return run_and_write(config, options, out);
}

int validate(const std::string& suite, const Options& options, std::ostream& out) {
  const std::uint64_t seed = options.seed.value_or(20240611);
  const std::vector<Eigen::Index> sizes = {256, 512, 1024};
  const bool all = suite == "all";
  bool known = all;
  bool pass = true;
  json report = {{"seed", seed}};

  if (all || suite == "rank2") {
    known = true;
    const Rank2Check c = check_rank2_closed_form(100, 64, seed);
    const Rank2Asymptotics a = check_rank2_asymptotics(200, 1024, seed + 1);
    const bool p = c.max_error < 1e-10 && a.frac_theta1 >= 0.95 && a.frac_theta2 >= 0.95;
    report["rank2"] = {{"instances", c.instances},    {"max_error", c.max_error},
                       {"draws", a.draws},            {"frac_theta1_within_5_over_N", a.frac_theta1},
                       {"frac_theta2_within_5_over_sqrtN", a.frac_theta2}, {"pass", p}};
    pass = pass && p;
  }
  if (all || suite == "qve") {
    known = true;
    const QveCheck q = check_qve(256, seed + 2);
    const bool p = q.flat_max_error < 1e-12 && q.max_residual < 1e-10;
    report["qve"] = {{"solves", q.solves}, {"flat_max_error", q.flat_max_error}, {"max_residual", q.max_residual},
                     {"pass", p}};
    pass = pass && p;
  }
  if (all || suite == "local-law") {
    known = true;
    const LocalLawTrend t = local_law_trend(sizes, 3, 0.01, seed + 3);
    json rows = json::array();
    for (const auto& r : t.rows)
      rows.push_back({{"N", r.N}, {"supercritical", r.supercritical}, {"subcritical", r.subcritical}});
    const bool p = t.slope_supercritical < -0.1 && t.slope_subcritical < -0.1;
    report["local_law"] = {{"rows", rows},
                           {"slope_supercritical", t.slope_supercritical},
                           {"slope_subcritical", t.slope_subcritical},
                           {"pass", p}};
    pass = pass && p;
  }
  if (all || suite == "approx") {
    known = true;
    const auto rows = approximation_gap(sizes, 20, seed + 4);
    json j = json::array();
    bool p = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double bound = 10.0 * std::pow(static_cast<double>(rows[i].N), -0.9);
      p = p && rows[i].median_gap <= bound && (i == 0 || rows[i].median_gap < rows[i - 1].median_gap);
      j.push_back({{"N", rows[i].N}, {"median_gap", rows[i].median_gap}, {"bound", bound}});
    }
    report["approx"] = {{"rows", j}, {"pass", p}};
    pass = pass && p;
  }
  if (all || suite == "interp") {
    known = true;
    const InterpolationCheck c = check_interpolation(30, 256, seed + 5);
    const bool p = c.v1_bitwise && c.max_spike_error < 1e-14 && c.ordering_violations == 0;
    report["interp"] = {{"draws", c.draws},
                        {"v1_bitwise", c.v1_bitwise},
                        {"max_spike_error", c.max_spike_error},
                        {"ordering_violations", c.ordering_violations},
                        {"pass", p}};
    pass = pass && p;
  }
  if (!known) throw ConfigError("unknown validation suite '" + suite + "'");
  report["pass"] = pass;
  if (options.out) {
    std::error_code ec;
    fs::create_directories(*options.out, ec);
    write_json(*options.out / "effective_config.json", {{"suite", suite}, {"seed", seed}});
    write_json(*options.out / "validate.json", report);
  }
  out << report.dump(2) << '\n';
  return pass ? ok : acceptance_failure;
}

int tw_table(const std::string& action, const Options& options, std::ostream& out) {
  if (action != "regen" && action != "check") throw ConfigError("tw-table action must be regen or check");
  const TwTableReport fresh = generate_tw1_table();
  const unsigned long fresh_crc = crc32_of(fresh.csv);
  json report = {{"refinement_delta", fresh.max_refinement_delta},
                 {"interpolation_delta", fresh.max_interpolation_delta},
                 {"crc32", hex32(fresh_crc)}};
  if (action == "regen") {
    const fs::path dir = options.out.value_or(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    {
      std::ofstream f(dir / "tw1_goe.csv", std::ios::binary);
      if (!f) throw ConfigError("cannot write " + (dir / "tw1_goe.csv").string());
      f << fresh.csv;
    }
    std::ofstream c(dir / "tw1_goe.crc32", std::ios::binary);
    c << hex32(fresh_crc) << '\n';
    report["written"] = (dir / "tw1_goe.csv").string();
    out << report.dump(2) << '\n';
    return ok;
  }
  const Tw1Table shipped = Tw1Table::shipped();
  const Tw1Table regenerated = Tw1Table::from_csv(fresh.csv);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < shipped.values().size(); ++i)
    max_diff = std::max(max_diff, std::abs(shipped.values()[i] - regenerated.values()[i]));
  const bool checksum_ok = shipped_tw1_crc32() == recorded_tw1_crc32();
  const bool pass = checksum_ok && max_diff < 1e-12;
  report["shipped_crc32"] = hex32(shipped_tw1_crc32());
  report["recorded_crc32"] = hex32(recorded_tw1_crc32());
  report["identical"] = fresh_crc == shipped_tw1_crc32();
  report["max_abs_diff"] = max_diff;
  report["pass"] = pass;
  out << report.dump(2) << '\n';
  return pass ? ok : acceptance_failure;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace bbp::cli
