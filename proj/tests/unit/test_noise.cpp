#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "bbp/error.hpp"
#include "bbp/noise.hpp"
#include "bbp/quadrature.hpp"

using namespace bbp;

namespace {

const NoiseModel& mix() {
  static const NoiseModel m = NoiseModel::bimodal_mixture();
  return m;
}

std::vector<NoiseModel> builtins() {
  return {NoiseModel::standard_gaussian(), NoiseModel::bimodal_mixture(), NoiseModel::mixture(0.6, 0.8),
          NoiseModel::preset("logistic")};
}

double log_pdf_slope(const NoiseModel& m, double x) {
  return central_difference([&](double y) { return std::log(m.pdf(y)); }, x, 1e-4);
}

}  // namespace

TEST_SUITE("noise") {
  TEST_CASE("gaussian density at zero") {
    CHECK(NoiseModel::standard_gaussian().pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
  }

  TEST_CASE("mixture density values") {
    // Unit-mass prefactor sqrt5 / (2 sqrt(2 pi)); values from an independent scipy evaluation.
    CHECK(std::abs(mix().pdf(0.0) - 0.12072747129440334) < 1e-15);
    CHECK(std::abs(mix().pdf(2.0 / std::sqrt(5.0)) - 0.44618065577932003) < 1e-15);
    const double pref = std::sqrt(5.0) / (2.0 * std::sqrt(2.0 * std::numbers::pi));
    CHECK(mix().pdf(2.0 / std::sqrt(5.0)) == doctest::Approx(pref * (1.0 + std::exp(-8.0))).epsilon(1e-14));
  }

  TEST_CASE("density far in the tail returns zero without throwing") {
    CHECK(mix().pdf(60.0) == 0.0);
    CHECK(NoiseModel::standard_gaussian().pdf(-80.0) == 0.0);
  }

  TEST_CASE("built-in laws are normalized with unit variance") {
    for (const auto& m : builtins()) {
      CAPTURE(m.name());
      CHECK(std::abs(m.expect([](double) { return 1.0; }) - 1.0) < 1e-10);
      CHECK(std::abs(m.expect([](double x) { return x; })) < 1e-8);
      CHECK(std::abs(m.expect([](double x) { return x * x; }) - 1.0) < 1e-8);
    }
  }

  TEST_CASE("mixture parameters must satisfy a^2 + b^2 = 1") {
    CHECK_THROWS_AS(NoiseModel::mixture(0.5, 0.5), ConfigError);
    CHECK_THROWS_AS(NoiseModel::preset("cauchy"), ConfigError);
  }

  TEST_CASE("custom density that is not unit variance is rejected") {
    auto wide = [](double x) { return std::exp(-x * x / 8.0) / std::sqrt(8.0 * std::numbers::pi); };
    CHECK_THROWS_AS(NoiseModel::custom("wide", wide, 20.0), ConfigError);
  }

  TEST_CASE("sampling moments") {
    Rng rng(17);
    const std::size_t n = 100000;
    const auto g = NoiseModel::standard_gaussian().sample(rng, n);
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));

    const auto m = mix().sample(rng, n);
    double s1 = 0.0, s2 = 0.0;
    for (double v : m) {
      s1 += v;
      s2 += v * v;
    }
    const double var = s2 / n - (s1 / n) * (s1 / n);
    CHECK(std::abs(var - 1.0) < 5.0 / std::sqrt(double(n)));
  }

  TEST_CASE("sampling is deterministic in the seed") {
    for (const auto& m : builtins()) {
      Rng a(99), b(99);
      CHECK(m.sample(a, 1000) == m.sample(b, 1000));
    }
  }

  TEST_CASE("gaussian score is the identity") {
    const auto g = NoiseModel::standard_gaussian();
    for (double x : {-1.0, 0.0, 2.5}) CHECK(g.score(x) == x);
  }

  TEST_CASE("mixture score") {
    CHECK(mix().score(0.0) == 0.0);
    // 5 ((x - b) e1 + (x + b) e2) / (e1 + e2) at x = 1, evaluated independently.
    CHECK(std::abs(mix().score(1.0) - 0.52903096314884801) < 1e-13);
    CHECK(std::abs(mix().score(1.0) + log_pdf_slope(mix(), 1.0)) < 1e-8);
  }

  TEST_CASE("score matches the log-density slope at random points") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const auto& m : builtins()) {
      for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        CAPTURE(m.name());
        CAPTURE(x);
        CHECK(std::abs(m.score(x) + log_pdf_slope(m, x)) < 1e-6);
      }
    }
  }

  TEST_CASE("score derivatives match differences of the score") {
    for (const auto& m : {NoiseModel::bimodal_mixture(), NoiseModel::mixture(0.6, 0.8)}) {
      for (double x : {-1.3, -0.2, 0.4, 1.7}) {
        for (int k = 1; k <= 3; ++k) {
          const double fd =
              central_difference([&](double y) { return m.score_derivative(k - 1, y); }, x, 1e-4);
          CHECK(std::abs(m.score_derivative(k, x) - fd) < 1e-6 * (1.0 + std::abs(fd)));
        }
      }
    }
  }

  TEST_CASE("score refuses to evaluate where the density underflows") {
    CHECK_THROWS_WITH_AS(mix().score(60.0), doctest::Contains("tail evaluation"), NumericalError);
    CHECK_THROWS_AS(NoiseModel::standard_gaussian().score(45.0), NumericalError);
  }

  TEST_CASE("fisher information") {
    CHECK(std::abs(NoiseModel::standard_gaussian().fisher_information() - 1.0) < 1e-9);
    CHECK(std::abs(mix().fisher_information() - 3.628) < 0.001);
    CHECK(std::abs(mix().fisher_information() - 3.6280518241852242) < 1e-8);
    for (const auto& m : builtins()) {
      CHECK(m.fisher_information() >= 1.0 - 1e-9);
      CHECK(std::abs(m.fisher_information() - m.expect([&](double x) { return m.score(x) * m.score(x); })) < 1e-6);
    }
    CHECK(NoiseModel::preset("logistic").fisher_information() > 1.0 + 1e-3);
  }

  TEST_CASE("expectations") {
    const auto g = NoiseModel::standard_gaussian();
    CHECK(std::abs(g.expect([](double x) { return x * x * x * x; }) - 3.0) < 1e-9);
    CHECK(std::abs(mix().expect([](double x) { return x * x; }) - 1.0) < 1e-9);
    CHECK(std::abs(g.expect([](double x) { return std::pow(x * x + 3 * x - 1, 2) / 11.0; }) - 1.0) < 1e-9);
  }

  TEST_CASE("monte carlo agrees with quadrature") {
    const std::size_t n = 1000000;
    for (const auto& m : {NoiseModel::standard_gaussian(), NoiseModel::bimodal_mixture()}) {
      Rng rng(2024);
      const auto xs = m.sample(rng, n);
      const std::vector<std::function<double(double)>> gs = {
          [](double x) { return x; }, [](double x) { return x * x; }, [](double x) { return x * x * x * x; },
          [&](double x) { return m.score(x) * m.score(x); }};
      for (const auto& g : gs) {
        double s1 = 0.0, s2 = 0.0;
        for (double x : xs) {
          const double v = g(x);
          s1 += v;
          s2 += v * v;
        }
        const double mean = s1 / n;
        const double se = std::sqrt((s2 / n - mean * mean) / n);
        CHECK(std::abs(mean - m.expect(g)) < 5.0 * se);
      }
    }
  }
}
