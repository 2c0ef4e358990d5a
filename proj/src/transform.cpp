#include "bbp/transform.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "bbp/error.hpp"

namespace bbp {

namespace {

// Central-difference stencils of fourth order in the step. The step grows
// smoothly with |x|; a kinked step makes the truncation error jump, which
// adaptive quadrature of the moments then chases.
double finite_derivative(const Transform::Fn& f, int k, double x) {
  const double scale = std::sqrt(1.0 + x * x);
  switch (k) {
    case 1: {
      const double h = 1e-4 * scale;
      return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
    }
    case 2: {
      const double h = 1e-3 * scale;
      return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
             (12 * h * h);
    }
    case 3: {
      const double h = 1e-2 * scale;
      return (-f(x + 3 * h) + 8 * f(x + 2 * h) - 13 * f(x + h) + 13 * f(x - h) -
              8 * f(x - 2 * h) + f(x - 3 * h)) /
             (8 * h * h * h);
    }
    default:
      return f(x);
  }
}

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> differentiate(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

}  // namespace

Transform::Transform(Fn f, Fn d1, Fn d2, Fn d3, Provenance provenance, std::string label,
                     bool normalized, bool approximate)
    : provenance_(provenance), label_(std::move(label)), normalized_(normalized),
      approximate_(approximate) {
  if (!f) throw ConfigError("transform needs an evaluation function");
  fns_[0] = std::move(f);
  Fn given[3] = {std::move(d1), std::move(d2), std::move(d3)};
  for (int k = 1; k <= 3; ++k) {
    if (given[k - 1]) {
      fns_[k] = std::move(given[k - 1]);
    } else {
      approximate_ = true;
      fns_[k] = [g = fns_[0], k](double x) { return finite_derivative(g, k, x); };
    }
  }
}

double Transform::derivative(int k, double x) const {
  if (k < 0 || k > 3) throw ConfigError("transform derivative order must be in 0..3");
  return fns_[k](x);
}

Transform Transform::affine(double scale, double shift, bool normalized) const {
  if (coeffs_) {
    std::vector<double> c = *coeffs_;
    c[0] -= shift;
    for (double& v : c) v *= scale;
    Transform out = make_polynomial(std::move(c));
    out.label_ = label_;
    out.normalized_ = normalized;
    return out;
  }
  std::array<Fn, 4> scaled;
  scaled[0] = [f = fns_[0], scale, shift](double x) { return scale * (f(x) - shift); };
  for (int k = 1; k <= 3; ++k) {
    scaled[k] = [f = fns_[k], scale](double x) { return scale * f(x); };
  }
  return Transform(scaled[0], scaled[1], scaled[2], scaled[3], provenance_, label_, normalized,
                   approximate_);
}

Transform make_polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ConfigError("polynomial transform needs at least one coefficient");
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.size() < 2) throw ConfigError("polynomial transform must have degree >= 1");
  const auto c1 = differentiate(coeffs);
  const auto c2 = differentiate(c1);
  const auto c3 = differentiate(c2);
  std::ostringstream label;
  label << "polynomial(";
  for (std::size_t i = 0; i < coeffs.size(); ++i) label << (i ? "," : "") << coeffs[i];
  label << ")";
  Transform t([coeffs](double x) { return horner(coeffs, x); },
              [c1](double x) { return horner(c1, x); }, [c2](double x) { return horner(c2, x); },
              [c3](double x) { return horner(c3, x); }, Transform::Provenance::polynomial,
              label.str());
  t.coeffs_ = std::move(coeffs);
  return t;
}

Transform make_identity() {
  Transform t = make_polynomial({0.0, 1.0});
  return t;
}

Transform make_custom(std::string label, Transform::Fn f) {
  return Transform(std::move(f), nullptr, nullptr, nullptr, Transform::Provenance::custom,
                   std::move(label));
}

Transform make_optimal(const NoiseModel& model) {
  const double inv = 1.0 / std::sqrt(model.fisher_information());
  if (!std::isfinite(inv) || inv <= 0.0) throw NumericalError("Fisher information is not finite");
  auto level = [&model, inv](int k) -> Transform::Fn {
    return [model, inv, k](double x) { return inv * model.score_derivative(k, x); };
  };
  return Transform(level(0), level(1), level(2), level(3), Transform::Provenance::optimal_score,
                   "optimal(" + model.name() + ")", true,
                   model.kind() == NoiseModel::Kind::custom_density);
}

Transform normalize(const Transform& t, const NoiseModel& model) {
  const double mean = model.expect([&](double x) { return t(x); });
  const double var = model.expect([&](double x) {
    const double d = t(x) - mean;
    return d * d;
  });
  if (!(var > 1e-14)) throw ConfigError("degenerate transform: zero variance under the noise law");
  double scale = 1.0 / std::sqrt(var);
  const double d1 = derivative_moment(t, model, 1);
  if (d1 < 0.0) scale = -scale;
  return t.affine(scale, mean, true);
}

namespace {

// Finite-difference derivatives are only good to about 1e-10 pointwise, which
// puts an absolute 1e-9 error target out of reach for the adaptive rule.
double derivative_tolerance(const Transform& t) { return t.approximate() ? 1e-7 : 1e-9; }

}  // namespace

TransformMoments compute_moments(const Transform& t, const NoiseModel& model) {
  const double tol = derivative_tolerance(t);
  TransformMoments m;
  for (int k = 0; k <= 3; ++k) m.derivative[k] = derivative_moment(t, model, k);
  m.second = model.expect([&](double x) {
    const double v = t(x);
    return v * v;
  });
  m.f_d1 = model.expect([&](double x) { return t(x) * t.derivative(1, x); }, tol);
  m.d1_sq = model.expect(
      [&](double x) {
        const double v = t.derivative(1, x);
        return v * v;
      },
      tol);
  m.f_d2 = model.expect([&](double x) { return t(x) * t.derivative(2, x); }, tol);
  return m;
}

double derivative_moment(const Transform& t, const NoiseModel& model, int k) {
  if (k < 0 || k > 3) throw ConfigError("derivative moment order must be in 0..3");
  return model.expect([&](double x) { return t.derivative(k, x); },
                      k == 0 ? 1e-9 : derivative_tolerance(t));
}

void check_normalized(const TransformMoments& m) {
  std::ostringstream os;
  os.precision(10);
  if (std::abs(m.derivative[0]) >= 1e-7) {
    os << "transform is not centered: E[f] = " << m.derivative[0];
  } else if (std::abs(m.second - 1.0) >= 1e-6) {
    os << "transform does not have unit second moment: E[f^2] = " << m.second;
  } else if (m.derivative[1] < -1e-8) {
    os << "transform has negative E[f'] = " << m.derivative[1];
  } else {
    return;
  }
  throw ConfigError(os.str());
}

double effective_snr(double lambda, const TransformMoments& m) {
  if (lambda < 0.0) throw ConfigError("SNR must be non-negative");
  return lambda * m.derivative[1] * m.derivative[1];
}

double effective_snr(double lambda, const Transform& t, const NoiseModel& model) {
  const auto m = compute_moments(t, model);
  check_normalized(m);
  return effective_snr(lambda, m);
}

double detection_threshold(const TransformMoments& m, double zero_threshold) {
  const double d1 = m.derivative[1];
  if (std::abs(d1) <= zero_threshold) {
    throw NumericalError("E[f'] vanishes: use scaled regime (k_f >= 2)");
  }
  return 1.0 / (d1 * d1);
}

double detection_threshold(const Transform& t, const NoiseModel& model) {
  return detection_threshold(compute_moments(t, model));
}

VarianceCoeffs variance_profile_coeffs(double lambda, const TransformMoments& m) {
  VarianceCoeffs c;
  c.c1 = 2.0 * std::sqrt(lambda) * (m.f_d1 - m.derivative[0] * m.derivative[1]);
  c.c2 = lambda * (m.d1_sq - m.derivative[1] * m.derivative[1]);
  return c;
}

VarianceCoeffs variance_profile_coeffs(double lambda, const Transform& t, const NoiseModel& model) {
  const auto m = compute_moments(t, model);
  check_normalized(m);
  return variance_profile_coeffs(lambda, m);
}

int critical_index(const TransformMoments& m, double zero_threshold) {
  for (int k = 1; k <= 3; ++k) {
    if (std::abs(m.derivative[k]) > zero_threshold) return k;
  }
  throw NumericalError("no critical index <= 3: E[f'], E[f''], E[f'''] all vanish");
}

int critical_index(const Transform& t, const NoiseModel& model, double zero_threshold) {
  const auto m = compute_moments(t, model);
  check_normalized(m);
  return critical_index(m, zero_threshold);
}

Transform transform_preset(const std::string& name, const NoiseModel& model) {
  if (name == "identity") return make_identity();
  if (name == "quadratic") {
    const double s = 1.0 / std::sqrt(11.0);
    return make_polynomial({-s, 3 * s, s});
  }
  if (name == "hermite2") {
    const double s = 1.0 / std::sqrt(2.0);
    return make_polynomial({-s, 0.0, s});
  }
  if (name == "optimal") return make_optimal(model);
  throw ConfigError("unknown transform preset '" + name + "'");
}

}  // namespace bbp
