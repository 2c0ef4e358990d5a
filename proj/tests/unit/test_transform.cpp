#include <cmath>
#include <random>

#include <doctest.h>

#include "bbp/error.hpp"
#include "bbp/quadrature.hpp"
#include "bbp/transform.hpp"

using namespace bbp;

namespace {

const NoiseModel& gauss() {
  static const NoiseModel m = NoiseModel::standard_gaussian();
  return m;
}
const NoiseModel& mix() {
  static const NoiseModel m = NoiseModel::bimodal_mixture();
  return m;
}
const double kRoot11 = std::sqrt(11.0);

}  // namespace

TEST_SUITE("transform") {
  TEST_CASE("quadratic polynomial values and derivatives") {
    const Transform f = make_polynomial({-1 / kRoot11, 3 / kRoot11, 1 / kRoot11});
    CHECK(f(1.0) == doctest::Approx(3.0 / kRoot11).epsilon(1e-15));
    CHECK(std::abs(f(1.0) - 0.9045) < 1e-4);
    for (double x : {-2.0, 0.0, 3.5}) {
      CHECK(f.derivative(2, x) == doctest::Approx(2.0 / kRoot11).epsilon(1e-15));
      CHECK(f.derivative(3, x) == 0.0);
    }
    CHECK(f.provenance() == Transform::Provenance::polynomial);
  }

  TEST_CASE("identity polynomial") {
    const Transform f = make_polynomial({0.0, 1.0});
    for (double x : {-4.0, 0.3, 7.0}) {
      CHECK(f(x) == x);
      CHECK(f.derivative(1, x) == 1.0);
      CHECK(f.derivative(2, x) == 0.0);
    }
  }

  TEST_CASE("bad polynomials are rejected") {
    CHECK_THROWS_AS(make_polynomial({}), ConfigError);
    CHECK_THROWS_AS(make_polynomial({1.0}), ConfigError);
  }

  TEST_CASE("closed-form derivatives agree with central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const std::vector<Transform> pool = {make_optimal(mix()), transform_preset("quadratic", gauss()),
                                         make_polynomial({0.3, -0.2, 0.5, 0.1})};
    for (const auto& t : pool) {
      for (int i = 0; i < 50; ++i) {
        const double x = u(rng);
        for (int k = 1; k <= 3; ++k) {
          const double fd = central_difference([&](double y) { return t.derivative(k - 1, y); }, x, 1e-3);
          CAPTURE(t.label());
          CAPTURE(k);
          CHECK(std::abs(t.derivative(k, x) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
      }
    }
  }

  TEST_CASE("custom transform derivatives by finite differences") {
    const Transform t = make_custom("sin", [](double x) { return std::sin(x); });
    for (double x : {-1.0, 0.5, 2.0}) {
      CHECK(std::abs(t.derivative(1, x) - std::cos(x)) < 1e-9);
      CHECK(std::abs(t.derivative(2, x) + std::sin(x)) < 1e-7);
      CHECK(std::abs(t.derivative(3, x) + std::cos(x)) < 1e-5);
    }
  }

  TEST_CASE("optimal transform") {
    const Transform g = make_optimal(gauss());
    for (double x = -5.0; x <= 5.0; x += 0.25) CHECK(std::abs(g(x) - x) < 1e-9);

    const Transform f = make_optimal(mix());
    CHECK(f.normalized());
    // Leading constant 5 / sqrt(F_h) of the closed form.
    CHECK(std::abs(5.0 / std::sqrt(mix().fisher_information()) - 2.62503) < 1e-5);
    const TransformMoments m = compute_moments(f, mix());
    CHECK(std::abs(m.derivative[1] - 1.905) < 5e-4);
    CHECK(std::abs(m.derivative[1] - std::sqrt(mix().fisher_information())) < 1e-7);
    CHECK(std::abs(m.derivative[0]) < 1e-9);
    CHECK(std::abs(m.second - 1.0) < 1e-7);
  }

  TEST_CASE("normalize") {
    const Transform two = normalize(make_polynomial({0.0, 2.0}), gauss());
    const Transform neg = normalize(make_polynomial({0.0, -1.0}), gauss());
    const Transform quad = normalize(make_polynomial({-1.0, 3.0, 1.0}), gauss());
    for (double x : {-2.0, 0.1, 1.5}) {
      CHECK(two(x) == doctest::Approx(x).epsilon(1e-10));
      CHECK(neg(x) == doctest::Approx(x).epsilon(1e-10));
      CHECK(quad(x) == doctest::Approx((x * x + 3 * x - 1) / kRoot11).epsilon(1e-10));
    }
    CHECK(quad.normalized());
    CHECK_THROWS_AS(normalize(make_custom("flat", [](double) { return 3.0; }), gauss()), ConfigError);
  }

  TEST_CASE("derivative moments") {
    const Transform q = transform_preset("quadratic", gauss());
    CHECK(std::abs(derivative_moment(q, gauss(), 1) - 3.0 / kRoot11) < 1e-9);
    CHECK(std::abs(derivative_moment(q, gauss(), 1) - 0.905) < 5e-4);
    CHECK(std::abs(derivative_moment(make_identity(), gauss(), 1) - 1.0) < 1e-12);
    CHECK(std::abs(derivative_moment(make_optimal(mix()), mix(), 0)) < 1e-9);
    CHECK_THROWS_AS(derivative_moment(q, gauss(), 4), ConfigError);
  }

  TEST_CASE("effective snr") {
    const Transform f = make_optimal(mix());
    CHECK(std::abs(effective_snr(0.8, f, mix()) - 2.902) < 5e-4);
    CHECK(std::abs(effective_snr(0.1, f, mix()) - 0.363) < 5e-4);
    // 0.8 F_h and 0.1 F_h from an independent quadrature of F_h.
    CHECK(std::abs(effective_snr(0.8, f, mix()) - 2.9024414593481795) < 1e-7);
    for (double lam : {0.0, 0.4, 3.0}) CHECK(effective_snr(lam, make_identity(), gauss()) == doctest::Approx(lam));
  }

  TEST_CASE("detection thresholds") {
    CHECK(std::abs(detection_threshold(make_optimal(mix()), mix()) - 0.276) < 0.002);
    CHECK(std::abs(detection_threshold(transform_preset("quadratic", gauss()), gauss()) - 1.222) < 0.002);
    CHECK(std::abs(detection_threshold(transform_preset("quadratic", gauss()), gauss()) - 11.0 / 9.0) < 1e-8);
    CHECK(std::abs(detection_threshold(make_identity(), gauss()) - 1.0) < 1e-12);
    CHECK_THROWS_WITH_AS(detection_threshold(transform_preset("hermite2", gauss()), gauss()),
                         doctest::Contains("scaled regime"), NumericalError);
  }

  TEST_CASE("variance profile coefficients") {
    const VarianceCoeffs id = variance_profile_coeffs(1.7, make_identity(), gauss());
    CHECK(std::abs(id.c1) < 1e-12);
    CHECK(std::abs(id.c2) < 1e-12);

    // Gaussian moment oracle for f = (x^2 + 3x - 1)/sqrt11:
    // E[f f'] = E[(x^2+3x-1)(2x+3)]/11 = (3 + 9 - 6)/11 = 6/11, Var f' = 4/11.
    const Transform q = transform_preset("quadratic", gauss());
    const VarianceCoeffs c = variance_profile_coeffs(1.0, q, gauss());
    CHECK(std::abs(c.c1 - 12.0 / 11.0) < 1e-9);
    CHECK(std::abs(c.c2 - 4.0 / 11.0) < 1e-9);
    const VarianceCoeffs c4 = variance_profile_coeffs(4.0, q, gauss());
    CHECK(std::abs(c4.c1 - 2.0 * 12.0 / 11.0) < 1e-9);
    CHECK(std::abs(c4.c2 - 16.0 / 11.0) < 1e-9);
  }

  TEST_CASE("C2 is non-negative and C1 vanishes for odd f with even noise") {
    const std::vector<std::pair<Transform, const NoiseModel*>> pool = {
        {make_optimal(mix()), &mix()},
        {normalize(make_polynomial({0.0, 1.0, 0.0, 0.3}), gauss()), &gauss()},
        {transform_preset("quadratic", gauss()), &gauss()},
        {transform_preset("hermite2", gauss()), &gauss()}};
    for (const auto& [t, model] : pool) {
      const VarianceCoeffs c = variance_profile_coeffs(0.9, t, *model);
      CHECK(c.c2 >= -1e-12);
    }
    CHECK(std::abs(variance_profile_coeffs(0.9, pool[0].first, mix()).c1) < 1e-9);
    CHECK(std::abs(variance_profile_coeffs(0.9, pool[1].first, gauss()).c1) < 1e-9);
  }

  TEST_CASE("critical index") {
    CHECK(critical_index(make_identity(), gauss()) == 1);
    CHECK(critical_index(transform_preset("hermite2", gauss()), gauss()) == 2);
    CHECK(critical_index(make_optimal(mix()), mix()) == 1);
    // He3 / sqrt6 has E f' = E f'' = 0 and E f''' = sqrt6.
    const Transform he3 = normalize(make_polynomial({0.0, -3.0, 0.0, 1.0}), gauss());
    CHECK(critical_index(he3, gauss()) == 3);
    const Transform he4 = normalize(make_polynomial({3.0, 0.0, -6.0, 0.0, 1.0}), gauss());
    CHECK_THROWS_WITH_AS(critical_index(he4, gauss()), doctest::Contains("no critical index"), NumericalError);
  }

  TEST_CASE("effective snr is invariant under pre-scaling") {
    const Transform base = make_polynomial({-1.0, 3.0, 1.0});
    const double ref = effective_snr(1.3, normalize(base, gauss()), gauss());
    for (double c : {0.01, 0.7, 25.0}) {
      const Transform scaled = normalize(base.affine(c, 0.0, false), gauss());
      CHECK(std::abs(effective_snr(1.3, scaled, gauss()) - ref) < 1e-8);
    }
  }

  TEST_CASE("optimal transform maximizes the effective snr") {
    const std::vector<Transform> pool = {normalize(make_identity(), mix()), transform_preset("quadratic", mix()),
                                         normalize(make_polynomial({0.0, 1.0, 0.0, 0.5}), mix()),
                                         normalize(make_custom("tanh", [](double x) { return std::tanh(2 * x); }), mix())};
    const double best = effective_snr(1.0, make_optimal(mix()), mix());
    for (const auto& t : pool) CHECK(best >= effective_snr(1.0, normalize(t, mix()), mix()) - 1e-6);
  }

  TEST_CASE("normalization check reports violations") {
    TransformMoments m;
    m.second = 1.0;
    m.derivative[0] = 0.1;
    CHECK_THROWS_AS(check_normalized(m), ConfigError);
    m.derivative[0] = 0.0;
    m.derivative[1] = -0.5;
    CHECK_THROWS_AS(check_normalized(m), ConfigError);
    m.derivative[1] = 0.5;
    CHECK_NOTHROW(check_normalized(m));
  }
}
