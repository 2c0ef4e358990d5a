#include "bbp/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bbp/error.hpp"

namespace bbp {

GaussLegendreRule gauss_legendre(int m, double a, double b) {
  if (m < 1) throw ConfigError("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    // Newton on P_m starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[m - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[m - 1 - i] = half * w;
  }
  return rule;
}

namespace {

template <unsigned Points>
double kronrod(const std::function<double(double)>& g, double a, double b, double* error, double* l1 = nullptr) {
  using boost::math::quadrature::gauss_kronrod;
  // Panel error estimates add up over the subdivision, so a target much
  // tighter than the rounding level of the integrand only inflates them.
  return gauss_kronrod<double, Points>::integrate(g, a, b, 12, 1e-11, error, l1);
}

}  // namespace

double integrate(const std::function<double(double)>& g, double a, double b, double abs_tol) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = kronrod<31>(g, a, b, &error, &l1);
  // Large integrands cannot meet an absolute target below their rounding level.
  if (!std::isfinite(value) || error > std::max(abs_tol, 1e-10 * l1)) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "]: error estimate " << error;
    throw NumericalError(os.str());
  }
  return value;
}

double integrate_checked(const std::function<double(double)>& g, double a, double b,
                         double agreement) {
  double e31 = 0.0;
  double e61 = 0.0;
  const double v31 = kronrod<31>(g, a, b, &e31);
  const double v61 = kronrod<61>(g, a, b, &e61);
  if (!std::isfinite(v31) || !std::isfinite(v61) || std::abs(v31 - v61) > agreement) {
    std::ostringstream os;
    os << "quadrature refinements disagree: " << v31 << " vs " << v61;
    throw NumericalError(os.str());
  }
  return v61;
}

double central_difference(const std::function<double(double)>& g, double x, double step) {
  return (g(x - 2 * step) - 8 * g(x - step) + 8 * g(x + step) - g(x + 2 * step)) / (12 * step);
}

}  // namespace bbp
