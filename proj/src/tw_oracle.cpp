#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/airy.hpp>

#include "bbp/quadrature.hpp"
#include "bbp/theory.hpp"

namespace bbp {

namespace {

// Below this value the determinant has lost its relative accuracy and the
// left-tail asymptotic takes over.
constexpr double kFredholmFloor = 1e-9;

double fredholm_determinant(double s, int nodes) {
  const double length = std::max(6.0, 14.0 - s);
  const GaussLegendreRule rule = gauss_legendre(nodes, 0.0, length);
  Eigen::MatrixXd K(nodes, nodes);
  std::vector<double> root(nodes);
  for (int i = 0; i < nodes; ++i) root[i] = std::sqrt(rule.weights[i]);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v =
          root[i] * root[j] * boost::math::airy_ai(s + rule.nodes[i] + rule.nodes[j]);
      K(i, j) = -v;
      K(j, i) = -v;
    }
    K(i, i) += 1.0;
  }
  return K.partialPivLu().determinant();
}

}  // namespace

double tw1_left_tail(double s) {
  const double a = std::abs(s);
  const double zeta_prime_m1 = -0.16542114370045092;
  const double tau = std::pow(2.0, -11.0 / 48.0) * std::exp(0.5 * zeta_prime_m1);
  return tau * std::pow(a, -1.0 / 16.0) *
         std::exp(-a * a * a / 24.0 - std::pow(a, 1.5) / (3.0 * std::sqrt(2.0)));
}

double tw1_fredholm_cdf(double s, int nodes) {
  const double det = fredholm_determinant(s, nodes);
  if (s < 0.0 && det < kFredholmFloor) return tw1_left_tail(s);
  return std::min(1.0, det);
}

TwTableReport generate_tw1_table(double step, int nodes) {
  TwTableReport report;
  const int count = static_cast<int>(std::lround((Tw1Table::kMax - Tw1Table::kMin) / step));
  std::ostringstream csv;
  csv << "s,cdf\n";
  char line[64];
  std::vector<double> grid;
  for (int i = 0; i <= count; ++i) {
    const double s = Tw1Table::kMin + i * step;
    const double f = tw1_fredholm_cdf(s, nodes);
    const double fine = tw1_fredholm_cdf(s, 2 * nodes);
    report.max_refinement_delta = std::max(report.max_refinement_delta, std::abs(f - fine));
    std::snprintf(line, sizeof line, "%.2f,%.17g\n", s, f);
    csv << line;
    grid.push_back(s);
  }
  report.csv = csv.str();
  const Tw1Table table = Tw1Table::from_csv(report.csv);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mid = 0.5 * (grid[i] + grid[i + 1]);
    const double exact = tw1_fredholm_cdf(mid, nodes);
    report.max_interpolation_delta =
        std::max(report.max_interpolation_delta, std::abs(exact - table.cdf(mid)));
  }
  return report;
}

}  // namespace bbp
