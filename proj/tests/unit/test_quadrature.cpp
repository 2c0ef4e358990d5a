#include <cmath>
#include <numbers>

#include <doctest.h>

#include "bbp/error.hpp"
#include "bbp/quadrature.hpp"

using namespace bbp;

TEST_SUITE("quadrature") {
  TEST_CASE("gauss-legendre integrates polynomials of degree 2m-1 exactly") {
    const auto rule = gauss_legendre(6, -1.0, 3.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], 11);
    // int_{-1}^{3} x^11 dx = (3^12 - 1) / 12
    CHECK(sum == doctest::Approx((std::pow(3.0, 12) - 1.0) / 12.0).epsilon(1e-13));
  }

  TEST_CASE("adaptive integral of a Gaussian density") {
    const double v = integrate([](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); },
                               -10.0, 10.0);
    CHECK(std::abs(v - 1.0) < 1e-13);
  }

  TEST_CASE("checked integral agrees with the plain one") {
    auto g = [](double x) { return std::cos(3 * x) * std::exp(-x * x); };
    CHECK(std::abs(integrate_checked(g, -8, 8) - integrate(g, -8, 8)) < 1e-12);
  }

  TEST_CASE("central difference of sin") {
    auto g = [](double x) { return std::sin(x); };
    CHECK(std::abs(central_difference(g, 0.7, 1e-3) - std::cos(0.7)) < 1e-11);
  }
}
