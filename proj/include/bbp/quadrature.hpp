#pragma once

#include <functional>
#include <vector>

namespace bbp {

struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule on [a, b].
GaussLegendreRule gauss_legendre(int m, double a = -1.0, double b = 1.0);

/// Adaptive Gauss-Kronrod integral of g over [a, b]. Throws NumericalError
/// when the error estimate exceeds `abs_tol`.
double integrate(const std::function<double(double)>& g, double a, double b,
                 double abs_tol = 1e-9);

/// Same integral with two Kronrod orders; throws when they disagree by more
/// than `agreement`.
double integrate_checked(const std::function<double(double)>& g, double a, double b,
                         double agreement = 1e-6);

/// Five-point central difference of g at x.
double central_difference(const std::function<double(double)>& g, double x, double step);

}  // namespace bbp
