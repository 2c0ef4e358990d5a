#include "bbp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/crc.hpp>

#include "bbp/quadrature.hpp"

namespace bbp {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::supercritical:
      return "supercritical";
    case Regime::subcritical:
      return "subcritical";
    case Regime::scaled_k2:
      return "scaled-k2";
    case Regime::no_theory:
      return "no-theory";
  }
  return "unknown";
}

Regime regime_from_string(const std::string& s) {
  if (s == "supercritical") return Regime::supercritical;
  if (s == "subcritical") return Regime::subcritical;
  if (s == "scaled-k2") return Regime::scaled_k2;
  if (s == "no-theory") return Regime::no_theory;
  throw ConfigError("unknown regime '" + s + "'");
}

double gaussian_cdf(double s, double mean, double variance) {
  return 0.5 * std::erfc(-(s - mean) / std::sqrt(2.0 * variance));
}

double gaussian_pdf(double s, double mean, double variance) {
  const double z = s - mean;
  return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// ---------------------------------------------------------------------------
// Tracy-Widom table

Tw1Table Tw1Table::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "s,cdf") {
    throw ConfigError("TW table: expected header 's,cdf'");
  }
  Tw1Table t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("TW table: malformed row '" + line + "'");
    t.s_.push_back(std::stod(line.substr(0, comma)));
    t.cdf_.push_back(std::stod(line.substr(comma + 1)));
  }
  if (t.s_.size() < 4) throw ConfigError("TW table: too few rows");
  for (std::size_t i = 1; i < t.s_.size(); ++i) {
    if (!(t.s_[i] > t.s_[i - 1])) throw ConfigError("TW table: grid must be increasing");
    if (!(t.cdf_[i] > t.cdf_[i - 1])) {
      std::ostringstream os;
      os << "TW table: cdf not strictly increasing at s=" << t.s_[i];
      throw ConfigError(os.str());
    }
  }
  std::vector<double> xs = t.s_;
  std::vector<double> ys = t.cdf_;
  t.interp_ = std::make_shared<const Interpolant>(std::move(xs), std::move(ys));
  return t;
}

double Tw1Table::cdf(double s, bool* tail) const {
  if (tail) *tail = false;
  if (s <= s_.front()) {
    if (tail) *tail = s < s_.front();
    return s < s_.front() ? 0.0 : cdf_.front();
  }
  if (s >= s_.back()) {
    if (tail) *tail = s > s_.back();
    return s > s_.back() ? 1.0 : cdf_.back();
  }
  return std::clamp((*interp_)(s), 0.0, 1.0);
}

double Tw1Table::pdf(double s) const {
  if (s <= s_.front() || s >= s_.back()) return 0.0;
  return std::max(0.0, interp_->prime(s));
}

double Tw1Table::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  double lo = s_.front();
  double hi = s_.back();
  if (q <= cdf_.front()) return lo;
  if (q >= cdf_.back()) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Integral of s^power F(s) over the table, exact for the cubic interpolant.
double moment_integral(const Tw1Table& t, int power) {
  const auto& s = t.grid();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const GaussLegendreRule rule = gauss_legendre(4, s[i], s[i + 1]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double x = rule.nodes[k];
      total += rule.weights[k] * std::pow(x, power) * t.cdf(x);
    }
  }
  return total;
}

// Integral of s^power (1 - F(s)) beyond the table, with the right tail
// 1 - F(s) ~ C s^{-3/4} exp(-2/3 s^{3/2}) matched to the last grid value.
double right_tail_integral(const Tw1Table& t, int power) {
  const double b = t.grid().back();
  const double mass = 1.0 - t.values().back();
  if (!(mass > 0.0)) return 0.0;
  auto tail = [&](double x) {
    return std::pow(x, power) * mass * std::pow(b / x, 0.75) *
           std::exp(-2.0 / 3.0 * (std::pow(x, 1.5) - std::pow(b, 1.5)));
  };
  return integrate(tail, b, b + 12.0, 1e-15);
}

}  // namespace

// E S = b - int_a^b F ds + int_b^inf (1 - F) ds; the mass left of a is below 1e-21.
double Tw1Table::mean() const {
  return s_.back() - moment_integral(*this, 0) + right_tail_integral(*this, 0);
}

double Tw1Table::variance() const {
  const double b = s_.back();
  const double second = b * b - 2.0 * moment_integral(*this, 1) + 2.0 * right_tail_integral(*this, 1);
  const double mu = mean();
  return second - mu * mu;
}

unsigned long crc32_of(const std::string& text) {
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  return crc.checksum();
}

double tw1_cdf(double s) { return Tw1Table::shipped().cdf(s); }
double tw1_quantile(double q) { return Tw1Table::shipped().quantile(q); }

// ---------------------------------------------------------------------------
// Reference laws and predictions

double ReferenceLaw::cdf(double s) const {
  switch (kind) {
    case Kind::gaussian:
      return gaussian_cdf(s, mean, variance);
    case Kind::tracy_widom_goe:
      return tw1_cdf(s);
    case Kind::none:
      break;
  }
  throw ConfigError("no reference law for this regime");
}

double ReferenceLaw::pdf(double s) const {
  switch (kind) {
    case Kind::gaussian:
      return gaussian_pdf(s, mean, variance);
    case Kind::tracy_widom_goe:
      return Tw1Table::shipped().pdf(s);
    case Kind::none:
      break;
  }
  throw ConfigError("no reference law for this regime");
}

std::string ReferenceLaw::name() const {
  switch (kind) {
    case Kind::gaussian:
      return "gaussian";
    case Kind::tracy_widom_goe:
      return "tracy-widom-goe";
    case Kind::none:
      break;
  }
  return "none";
}

double TheoryPrediction::centering(Eigen::Index N) const {
  return location + edge_offset / std::sqrt(static_cast<double>(N));
}

double TheoryPrediction::rescale(double mu1, Eigen::Index N) const {
  return std::pow(static_cast<double>(N), -scale_exponent) * (mu1 - centering(N));
}

double TheoryPrediction::unrescale(double rescaled, Eigen::Index N) const {
  return centering(N) + rescaled * std::pow(static_cast<double>(N), scale_exponent);
}

namespace {

TheoryPrediction bbp_prediction(double snr, double margin) {
  if (std::abs(snr - 1.0) < margin) {
    std::ostringstream os;
    os << "near-critical, no prediction: effective SNR " << snr << " is within " << margin
       << " of 1";
    throw NearCriticalError(os.str());
  }
  TheoryPrediction p;
  p.effective_snr = snr;
  if (snr > 1.0) {
    const double root = std::sqrt(snr);
    p.regime = Regime::supercritical;
    p.location = root + 1.0 / root;
    p.scale_exponent = -0.5;
    p.law = {ReferenceLaw::Kind::gaussian, 0.0, 2.0 * (snr - 1.0) / snr};
  } else {
    p.regime = Regime::subcritical;
    p.location = 2.0;
    p.scale_exponent = -2.0 / 3.0;
    p.law = {ReferenceLaw::Kind::tracy_widom_goe, Tw1Table::shipped().mean(),
             Tw1Table::shipped().variance()};
  }
  return p;
}

}  // namespace

TheoryPrediction predict(double lambda, const TransformMoments& m, double margin) {
  check_normalized(m);
  TheoryPrediction p = bbp_prediction(effective_snr(lambda, m), margin);
  if (std::abs(m.derivative[1]) > 1e-8) p.detection_threshold = detection_threshold(m);
  return p;
}

double scaled_c2(const TransformMoments& m) {
  return m.second + m.f_d2 - m.derivative[0] * m.derivative[2];
}

TheoryPrediction predict_scaled(double lambda0, const TransformMoments& m, double w4,
                                double margin, double zero_threshold) {
  check_normalized(m);
  const int kf = critical_index(m, zero_threshold);
  if (kf != 2) {
    std::ostringstream os;
    os << "scaled prediction requires k_f = 2 (got k_f = " << kf << ")";
    if (kf == 3) os << "; only the k_f = 2 scaling lambda = lambda0 sqrt(N) is worked out";
    throw ConfigError(os.str());
  }
  if (!(lambda0 >= 0.0) || !(w4 > 0.0)) throw ConfigError("scaled prediction needs lambda0 >= 0, w4 > 0");
  const double d2 = m.derivative[2];
  const double snr = 0.25 * lambda0 * lambda0 * w4 * w4 * d2 * d2;
  TheoryPrediction p = bbp_prediction(snr, margin);
  const double c2 = scaled_c2(m);
  p.regime = Regime::scaled_k2;
  if (snr > 1.0) {
    p.shift = 0.5 * c2 * p.location;
    p.law.mean = p.shift;
  } else {
    p.edge_offset = c2;
  }
  return p;
}

}  // namespace bbp
