#include "bbp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "bbp/error.hpp"

namespace bbp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

NoiseSpec noise_from_json(const json& j) {
  reject_unknown(j, {"type", "a", "b", "name"}, "noise");
  NoiseSpec s;
  read_opt(j, "type", s.type, "noise");
  read_opt(j, "a", s.a, "noise");
  read_opt(j, "b", s.b, "noise");
  read_opt(j, "name", s.name, "noise");
  if (s.type != "gaussian" && s.type != "mixture" && s.type != "custom")
    throw ConfigError("noise.type must be gaussian, mixture or custom");
  return s;
}

TransformSpec transform_from_json(const json& j) {
  reject_unknown(j, {"type", "coeffs", "name", "normalize"}, "transform");
  TransformSpec s;
  read_opt(j, "type", s.type, "transform");
  read_opt(j, "coeffs", s.coeffs, "transform");
  read_opt(j, "name", s.name, "transform");
  read_opt(j, "normalize", s.normalize, "transform");
  if (s.type != "identity" && s.type != "polynomial" && s.type != "optimal" && s.type != "preset")
    throw ConfigError("transform.type must be identity, polynomial, optimal or preset");
  return s;
}

SpikePrior prior_from_json(const json& j) {
  reject_unknown(j, {"type", "law", "post_normalize"}, "prior");
  std::string type = "rademacher";
  read_opt(j, "type", type, "prior");
  SpikePrior p;
  if (type == "rademacher") {
    p = SpikePrior::rademacher();
  } else if (type == "spherical") {
    p = SpikePrior::spherical();
  } else if (type == "iid") {
    p = SpikePrior::iid("gaussian");
    read_opt(j, "law", p.entry_law, "prior");
    read_opt(j, "post_normalize", p.post_normalize, "prior");
    p.fourth_moment();  // validates the law
  } else {
    throw ConfigError("prior.type must be rademacher, spherical or iid");
  }
  return p;
}

json prior_to_json(const SpikePrior& p) {
  switch (p.kind) {
    case SpikePrior::Kind::iid_rademacher:
      return {{"type", "rademacher"}};
    case SpikePrior::Kind::spherical:
      return {{"type", "spherical"}};
    case SpikePrior::Kind::iid_custom:
      break;
  }
  return {{"type", "iid"}, {"law", p.entry_law}, {"post_normalize", p.post_normalize}};
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s.empty()) return kNaN;
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad number '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("number out of range '" + s + "'");
  }
}

}  // namespace

NoiseModel NoiseSpec::build() const {
  if (type == "gaussian") return NoiseModel::standard_gaussian();
  if (type == "mixture") return NoiseModel::mixture(a, b);
  if (type == "custom") return NoiseModel::preset(name);
  throw ConfigError("unknown noise type '" + type + "'");
}

Transform TransformSpec::build(const NoiseModel& model) const {
  if (type == "optimal") return make_optimal(model);
  Transform t = make_identity();
  if (type == "identity") {
    t = make_identity();
  } else if (type == "polynomial") {
    t = make_polynomial(coeffs);
  } else if (type == "preset") {
    t = transform_preset(name, model);
  } else {
    throw ConfigError("unknown transform type '" + type + "'");
  }
  return normalize ? bbp::normalize(t, model) : t;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"N", "trials", "lambda", "lambda0", "scaled", "noise", "transform", "prior", "regime",
                  "master_seed", "workers", "compute_mu2", "margin", "zero_threshold", "outputs"},
                 "config");
  ExperimentConfig c;
  read_opt(j, "N", c.N, "config");
  read_opt(j, "trials", c.trials, "config");
  read_opt(j, "lambda", c.lambda, "config");
  if (j.contains("lambda0") && !j.at("lambda0").is_null()) {
    double l0 = 0.0;
    read_opt(j, "lambda0", l0, "config");
    c.lambda0 = l0;
  }
  read_opt(j, "scaled", c.scaled, "config");
  if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"));
  if (j.contains("transform")) c.transform = transform_from_json(j.at("transform"));
  if (j.contains("prior")) c.prior = prior_from_json(j.at("prior"));
  read_opt(j, "regime", c.regime, "config");
  read_opt(j, "master_seed", c.master_seed, "config");
  read_opt(j, "workers", c.workers, "config");
  read_opt(j, "compute_mu2", c.compute_mu2, "config");
  read_opt(j, "margin", c.margin, "config");
  read_opt(j, "zero_threshold", c.zero_threshold, "config");
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    reject_unknown(o, {"path", "format"}, "outputs");
    read_opt(o, "path", c.outputs.path, "outputs");
    read_opt(o, "format", c.outputs.format, "outputs");
    if (c.outputs.format != "csv" && c.outputs.format != "json")
      throw ConfigError("outputs.format must be csv or json");
  }

  if (c.N < 2) throw ConfigError("N must be at least 2");
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  if (c.workers < 0) throw ConfigError("workers must be non-negative");
  if (!(c.margin >= 0.0)) throw ConfigError("margin must be non-negative");
  if (c.regime != "auto" && c.regime != "supercritical" && c.regime != "subcritical")
    throw ConfigError("regime must be auto, supercritical or subcritical");
  if (c.scaled) {
    if (!c.lambda0) throw ConfigError("scaled mode needs lambda0");
    if (c.regime != "auto") throw ConfigError("scaled mode only supports regime auto");
  } else if (!(c.lambda >= 0.0)) {
    throw ConfigError("lambda must be non-negative");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json t = {{"type", transform.type}, {"normalize", transform.normalize}};
  if (transform.type == "polynomial") t["coeffs"] = transform.coeffs;
  if (transform.type == "preset") t["name"] = transform.name;
  json n = {{"type", noise.type}};
  if (noise.type == "mixture") {
    n["a"] = noise.a;
    n["b"] = noise.b;
  }
  if (noise.type == "custom") n["name"] = noise.name;
  return {{"N", N},
          {"trials", trials},
          {"lambda", lambda},
          {"lambda0", lambda0 ? json(*lambda0) : json(nullptr)},
          {"scaled", scaled},
          {"noise", n},
          {"transform", t},
          {"prior", prior_to_json(prior)},
          {"regime", regime},
          {"master_seed", master_seed},
          {"workers", workers},
          {"compute_mu2", compute_mu2},
          {"margin", margin},
          {"zero_threshold", zero_threshold},
          {"outputs", {{"path", outputs.path}, {"format", outputs.format}}}};
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("bad override key '" + key + "'");
    if (!node->is_object()) throw ConfigError("override path '" + key + "' crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
  for (const auto& o : overrides) apply_override(doc, o);
  return ExperimentConfig::from_json(doc);
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BBP_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError(std::string("BBP_WORKERS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

TheoryPrediction no_theory_prediction(double snr) {
  TheoryPrediction p;
  p.regime = Regime::no_theory;
  p.effective_snr = snr;
  p.location = 2.0;
  p.scale_exponent = 0.0;
  return p;
}

}  // namespace

ResolvedExperiment resolve(const ExperimentConfig& config) {
  NoiseModel noise = config.noise.build();
  Transform transform = config.transform.build(noise);
  TransformMoments moments = compute_moments(transform, noise);
  check_normalized(moments);

  double lambda = config.lambda;
  TheoryPrediction prediction;
  if (config.scaled) {
    lambda = *config.lambda0 * std::sqrt(static_cast<double>(config.N));
    try {
      prediction = predict_scaled(*config.lambda0, moments, config.prior.fourth_moment(), config.margin,
                                  config.zero_threshold);
    } catch (const NearCriticalError&) {
      prediction = no_theory_prediction(kNaN);
    }
  } else {
    const double snr = effective_snr(lambda, moments);
    if (config.regime == "auto") {
      try {
        prediction = predict(lambda, moments, config.margin);
      } catch (const NearCriticalError&) {
        prediction = no_theory_prediction(snr);
      }
    } else {
      const bool super = config.regime == "supercritical";
      if (super != (snr > 1.0)) {
        std::ostringstream os;
        os << "regime forced to " << config.regime << " but effective SNR is " << snr;
        throw ConfigError(os.str());
      }
      // Forcing a side of the transition skips the near-critical refusal.
      prediction = predict(lambda, moments, 0.0);
    }
  }
  return ResolvedExperiment{std::move(noise), std::move(transform), moments, config.prior, lambda,
                            prediction};
}

TrialRecord run_trial(const ExperimentConfig& config, const ResolvedExperiment& setup, std::int64_t index) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord r;
  r.trial = index;
  r.seed = trial_seed(config.master_seed, static_cast<std::uint64_t>(index));
  r.mu2 = kNaN;
  try {
    const SpikedSample s = draw_sample(setup.noise, setup.prior, config.N, setup.lambda, r.seed);
    const Matrix Mt = transform_entrywise(assemble(s.W, s.x, s.lambda), setup.transform);
    const SpectralResult spec = top_eigenvalues(Mt, config.compute_mu2 ? 2 : 1);
    r.mu1 = spec.eigenvalues.at(0);
    if (config.compute_mu2) r.mu2 = spec.eigenvalues.at(1);
    r.rescaled = setup.prediction.rescale(r.mu1, config.N);
    if (!std::isfinite(r.mu1)) throw NumericalError("non-finite eigenvalue");
  } catch (const std::exception&) {
    r.ok = false;
    r.mu1 = kNaN;
    r.mu2 = kNaN;
    r.rescaled = kNaN;
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<TrialRecord> run(const ExperimentConfig& config) { return run(config, resolve(config)); }

std::vector<TrialRecord> run(const ExperimentConfig& config, const ResolvedExperiment& setup) {
  const std::size_t n = static_cast<std::size_t>(config.trials);
  std::vector<TrialRecord> records(n);
  const int workers = std::min<int>(resolve_workers(config.workers), static_cast<int>(n));

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        records[i] = run_trial(config, setup, static_cast<std::int64_t>(i));
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (fatal) std::rethrow_exception(fatal);

  const auto failures = std::count_if(records.begin(), records.end(), [](const TrialRecord& r) { return !r.ok; });
  if (static_cast<double>(failures) > 0.01 * static_cast<double>(n)) {
    std::ostringstream os;
    os << failures << " of " << n << " trials failed";
    throw NumericalError(os.str());
  }
  return records;
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 2) throw ConfigError("ks_statistic needs at least 2 samples");
  std::vector<double> x(samples.begin(), samples.end());
  for (double v : x)
    if (std::isnan(v)) throw NumericalError("NaN in KS samples");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

double rigidity_exceedance(std::span<const TrialRecord> records, const TheoryPrediction& p, Eigen::Index N,
                           double epsilon, double c) {
  if (p.regime == Regime::no_theory) return kNaN;
  const double threshold = c * std::pow(static_cast<double>(N), p.scale_exponent + epsilon);
  const double centre = p.centering(N);
  std::size_t used = 0;
  std::size_t over = 0;
  for (const auto& r : records) {
    if (!r.ok) continue;
    ++used;
    if (std::abs(r.mu1 - centre) > threshold) ++over;
  }
  return used ? static_cast<double>(over) / static_cast<double>(used) : kNaN;
}

namespace {

double quantile_sorted(const std::vector<double>& x, double q) {
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace

Histogram make_histogram(std::span<const double> samples, std::size_t bins, const ReferenceLaw* law) {
  Histogram h;
  if (samples.empty()) return h;
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double lo = x.front();
  double hi = x.back();
  if (bins == 0) {
    const double iqr = quantile_sorted(x, 0.75) - quantile_sorted(x, 0.25);
    const double width = 2.0 * iqr * std::cbrt(1.0 / static_cast<double>(x.size()));
    bins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width)) : 1;
    bins = std::clamp<std::size_t>(bins, 1, 1000);
  }
  if (hi <= lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(b, bins - 1)]++;
  }
  if (law && law->kind != ReferenceLaw::Kind::none) {
    h.ref_density.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) h.ref_density[b] = law->pdf(0.5 * (h.edges[b] + h.edges[b + 1]));
  }
  return h;
}

AnalysisSummary summarize(std::span<const TrialRecord> records, const TheoryPrediction& p, Eigen::Index N,
                          const SummaryOptions& options) {
  std::vector<TrialRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.trial < b.trial; });
  std::vector<double> y;
  y.reserve(sorted.size());
  for (const auto& r : sorted)
    if (r.ok) y.push_back(r.rescaled);
  if (y.empty()) throw NumericalError("no successful trials to summarize");

  AnalysisSummary s;
  s.n = y.size();
  const double n = static_cast<double>(y.size());
  double sum = 0.0;
  for (double v : y) sum += v;
  s.mean = sum / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : y) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  s.var = y.size() > 1 ? m2 / (n - 1.0) : 0.0;
  s.skew = m2 > 0.0 ? (m3 / n) / std::pow(m2 / n, 1.5) : 0.0;
  s.regime = p.regime;
  s.location = p.location;
  s.reference = p.law;
  if (p.law.kind != ReferenceLaw::Kind::none && y.size() >= 2)
    s.ks = ks_statistic(y, [&](double v) { return p.law.cdf(v); });
  s.histogram = make_histogram(y, options.bins, &p.law);
  s.epsilon = options.epsilon;
  s.c = options.c;
  s.exceedance = rigidity_exceedance(sorted, p, N, options.epsilon, options.c);
  return s;
}

json summary_to_json(const AnalysisSummary& s) {
  json ref = {{"name", s.reference.name()}};
  if (s.reference.kind != ReferenceLaw::Kind::none) {
    ref["mean"] = s.reference.mean;
    ref["variance"] = s.reference.variance;
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"n", s.n},
          {"mean", num(s.mean)},
          {"var", num(s.var)},
          {"skew", num(s.skew)},
          {"ks", s.ks ? json(*s.ks) : json(nullptr)},
          {"regime", to_string(s.regime)},
          {"location", num(s.location)},
          {"reference", ref},
          {"rigidity", {{"epsilon", s.epsilon}, {"c", s.c}, {"exceedance", num(s.exceedance)}}}};
}

void write_records_csv(const std::filesystem::path& path, std::span<const TrialRecord> records, bool canonical) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "trial,mu1,mu2,rescaled,seed,wall_ms\n";
  for (const auto& r : records) {
    out << r.trial << ',' << fmt17(r.mu1) << ',' << fmt17(r.mu2) << ',' << fmt17(r.rescaled) << ','
        << r.seed << ',' << (canonical ? std::string("0") : fmt17(r.wall_ms)) << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path.string());
}

std::vector<TrialRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "trial,mu1,mu2,rescaled,seed,wall_ms")
    throw ConfigError("unexpected results header in " + path.string());
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw ConfigError("malformed results row: " + line);
    TrialRecord r;
    try {
      r.trial = std::stoll(f[0]);
      r.seed = std::stoull(f[4]);
    } catch (const std::exception&) {
      throw ConfigError("malformed results row: " + line);
    }
    r.mu1 = parse_double(f[1]);
    r.mu2 = parse_double(f[2]);
    r.rescaled = parse_double(f[3]);
    r.wall_ms = parse_double(f[5]);
    r.ok = !std::isnan(r.mu1);
    out.push_back(r);
  }
  return out;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "bin_left,bin_right,count,ref_density\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out << fmt17(h.edges[b]) << ',' << fmt17(h.edges[b + 1]) << ',' << h.counts[b] << ','
        << (h.ref_density.empty() ? std::string() : fmt17(h.ref_density[b])) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace bbp
