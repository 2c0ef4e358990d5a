#include "bbp/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "bbp/error.hpp"
#include "bbp/quadrature.hpp"

namespace bbp {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Steps for the finite-difference score of custom densities.
constexpr double kScoreStep = 1e-5;
constexpr double kScoreDerivativeStep = 1e-3;

}  // namespace

NoiseModel NoiseModel::standard_gaussian() {
  NoiseModel m;
  m.kind_ = Kind::standard_gaussian;
  m.name_ = "gaussian";
  m.window_ = 10.0;
  m.validate_and_cache();
  return m;
}

NoiseModel NoiseModel::mixture(double a, double b) {
  if (!(a > 0.0) || b < 0.0 || std::abs(a * a + b * b - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "mixture noise needs a > 0, b >= 0 and a^2 + b^2 = 1 (got a=" << a << ", b=" << b << ")";
    throw ConfigError(os.str());
  }
  NoiseModel m;
  m.kind_ = Kind::gaussian_rademacher_mixture;
  m.name_ = "mixture";
  m.params_ = {a, b};
  m.window_ = 10.0;
  m.validate_and_cache();
  return m;
}

NoiseModel NoiseModel::bimodal_mixture() { return mixture(1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0)); }

NoiseModel NoiseModel::custom(std::string name, std::function<double(double)> pdf, double window) {
  if (!pdf) throw ConfigError("custom noise model needs a density");
  if (!(window > 0.0)) throw ConfigError("custom noise model needs a positive window");
  NoiseModel m;
  m.kind_ = Kind::custom_density;
  m.name_ = std::move(name);
  m.window_ = window;
  m.custom_pdf_ = std::move(pdf);
  m.validate_and_cache();
  return m;
}

NoiseModel NoiseModel::preset(std::string_view name) {
  if (name == "gaussian" || name == "standard-gaussian") return standard_gaussian();
  if (name == "mixture" || name == "gaussian-rademacher-mixture") return bimodal_mixture();
  if (name == "logistic") {
    // Unit-variance logistic law: scale s with pi^2 s^2 / 3 = 1.
    const double s = std::sqrt(3.0) / std::numbers::pi;
    return custom(
        "logistic",
        [s](double x) {
          const double c = std::cosh(x / (2.0 * s));
          return 1.0 / (4.0 * s * c * c);
        },
        40.0);
  }
  throw ConfigError("unknown noise preset '" + std::string(name) + "'");
}

double NoiseModel::pdf(double x) const {
  switch (kind_) {
    case Kind::standard_gaussian:
      return kInvSqrt2Pi * std::exp(-0.5 * x * x);
    case Kind::gaussian_rademacher_mixture: {
      const double a = params_[0];
      const double b = params_[1];
      const double norm = 0.5 * kInvSqrt2Pi / a;
      const double lo = (x - b) / a;
      const double hi = (x + b) / a;
      return norm * (std::exp(-0.5 * lo * lo) + std::exp(-0.5 * hi * hi));
    }
    case Kind::custom_density:
      return custom_pdf_(x);
  }
  return 0.0;
}

double NoiseModel::score(double x) const { return score_derivative(0, x); }

double NoiseModel::score_derivative(int k, double x) const {
  if (k < 0 || k > 3) throw ConfigError("score derivative order must be in 0..3");
  const bool underflow = kind_ == Kind::custom_density ? !(pdf(x) >= std::numeric_limits<double>::min())
                                                      : !(std::abs(x) <= tail_limit_);
  if (underflow) {
    std::ostringstream os;
    os << "tail evaluation: density underflows at x=" << x;
    throw NumericalError(os.str());
  }
  switch (kind_) {
    case Kind::standard_gaussian:
      return k == 0 ? x : (k == 1 ? 1.0 : 0.0);
    case Kind::gaussian_rademacher_mixture: {
      // h(x) = (x - b tanh(b x / a^2)) / a^2
      const double a2 = params_[0] * params_[0];
      const double b = params_[1];
      const double kk = b / a2;
      const double t = std::tanh(kk * x);
      const double s2 = 1.0 - t * t;
      switch (k) {
        case 0:
          return (x - b * t) / a2;
        case 1:
          return (1.0 - b * kk * s2) / a2;
        case 2:
          return 2.0 * b * kk * kk * s2 * t / a2;
        default:
          return 2.0 * b * kk * kk * kk * (s2 * s2 - 2.0 * s2 * t * t) / a2;
      }
    }
    case Kind::custom_density: {
      if (k == 0) {
        auto logp = [this](double y) { return std::log(custom_pdf_(y)); };
        return -central_difference(logp, x, kScoreStep * std::max(1.0, std::abs(x)));
      }
      auto lower = [this, k](double y) { return score_derivative(k - 1, y); };
      return central_difference(lower, x, kScoreDerivativeStep * std::max(1.0, std::abs(x)));
    }
  }
  return 0.0;
}

double NoiseModel::expect(const std::function<double(double)>& g, double abs_tol) const {
  return integrate([&](double x) { return g(x) * pdf(x); }, -window_, window_, abs_tol);
}

double NoiseModel::draw(Rng& rng) const {
  double v = 0.0;
  fill(rng, std::span<double>(&v, 1));
  return v;
}

void NoiseModel::fill(Rng& rng, std::span<double> out) const {
  switch (kind_) {
    case Kind::standard_gaussian: {
      std::normal_distribution<double> normal;
      for (double& v : out) v = normal(rng);
      return;
    }
    case Kind::gaussian_rademacher_mixture: {
      std::normal_distribution<double> normal;
      const double a = params_[0];
      const double b = params_[1];
      for (double& v : out) {
        const double z = normal(rng);
        const double r = (rng() & 1ULL) ? 1.0 : -1.0;
        v = a * z + b * r;
      }
      return;
    }
    case Kind::custom_density: {
      std::uniform_real_distribution<double> position(-window_, window_);
      std::uniform_real_distribution<double> height(0.0, pdf_max_);
      constexpr int kMaxTries = 1'000'000;
      for (double& v : out) {
        int tries = 0;
        for (;;) {
          const double x = position(rng);
          if (height(rng) < custom_pdf_(x)) {
            v = x;
            break;
          }
          if (++tries >= kMaxTries) {
            throw NumericalError("rejection sampler for '" + name_ + "' exhausted its retries");
          }
        }
      }
      return;
    }
  }
}

std::vector<double> NoiseModel::sample(Rng& rng, std::size_t n) const {
  if (n == 0) throw ConfigError("sample size must be at least 1");
  std::vector<double> out(n);
  fill(rng, out);
  return out;
}

void NoiseModel::validate_and_cache() {
  if (kind_ != Kind::custom_density) {
    // Built-in laws are symmetric with decreasing tails: find where p drops
    // below the smallest normal double once, instead of per score call.
    double lo = 0.0;
    double hi = 64.0;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (pdf(mid) >= std::numeric_limits<double>::min() ? lo : hi) = mid;
    }
    tail_limit_ = lo;
  }
  constexpr int kGrid = 4000;
  pdf_max_ = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double x = -window_ + 2.0 * window_ * i / kGrid;
    const double p = pdf(x);
    if (!(p > 0.0) || !std::isfinite(p)) {
      std::ostringstream os;
      os << "noise model '" << name_ << "': density must be positive on the window, p(" << x
         << ") = " << p;
      throw ConfigError(os.str());
    }
    pdf_max_ = std::max(pdf_max_, p);
  }
  pdf_max_ *= 1.01;

  const double mass = expect([](double) { return 1.0; });
  const double mean = expect([](double x) { return x; });
  const double second = expect([](double x) { return x * x; });
  if (std::abs(mass - 1.0) > 1e-10 || std::abs(mean) > 1e-8 || std::abs(second - 1.0) > 1e-8) {
    std::ostringstream os;
    os.precision(12);
    os << "noise model '" << name_ << "' is not a centered unit-variance density: mass=" << mass
       << " mean=" << mean << " variance=" << second;
    throw ConfigError(os.str());
  }
  fisher_ = integrate_checked(
      [this](double x) {
        const double h = score(x);
        return h * h * pdf(x);
      },
      -window_, window_, 1e-6);
}

}  // namespace bbp
