#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "bbp/ensemble.hpp"
#include "bbp/error.hpp"
#include "bbp/spectra.hpp"
#include "bbp/validation.hpp"

using namespace bbp;
using Eigen::MatrixXd;

namespace {

MatrixXd random_symmetric(Eigen::Index N, std::uint64_t seed) {
  Rng rng(seed);
  return sample_wigner(NoiseModel::standard_gaussian(), N, rng);
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("diagonal matrix") {
    MatrixXd D = MatrixXd::Zero(3, 3);
    D.diagonal() << 1.0, 3.0, 0.0;
    const SpectralResult r = top_eigenvalues(D, 2);
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(r.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(r.eigenvalues[1] == doctest::Approx(1.0));
  }

  TEST_CASE("rank-one update of the identity") {
    Rng rng(1);
    const Eigen::VectorXd x = sample_spike(SpikePrior::spherical(), 700, rng);
    const MatrixXd S = MatrixXd::Identity(700, 700) + x * x.transpose();
    const SpectralResult r = top_eigenvalues(S, 1);
    CHECK(std::abs(r.eigenvalues[0] - 2.0) < 1e-12);
  }

  TEST_CASE("lanczos matches the dense solver") {
    for (Eigen::Index N : {64, 600}) {
      const MatrixXd S = random_symmetric(N, 7 + N);
      const SpectralResult full = full_top_eigenvalues(S, 3);
      const SpectralResult lan = lanczos_top_eigenvalues(S, 3);
      REQUIRE(lan.eigenvalues.size() == 3);
      CHECK(lan.method == SpectralResult::Method::iterative_topk);
      for (int k = 0; k < 3; ++k) CHECK(std::abs(lan.eigenvalues[k] - full.eigenvalues[k]) < 1e-10);
    }
  }

  TEST_CASE("method selection and residual certificates") {
    const MatrixXd small = random_symmetric(128, 3);
    CHECK(top_eigenvalues(small, 2).method == SpectralResult::Method::full_tridiagonal);
    const MatrixXd big = random_symmetric(640, 4);
    const SpectralResult r = top_eigenvalues(big, 2);
    CHECK(r.method == SpectralResult::Method::iterative_topk);
    const double fro = big.norm();
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
      CHECK(r.residual_norms[i] <= 1e-9 * (1.0 + std::abs(r.eigenvalues[i])) * fro);
    CHECK(r.eigenvalues[0] >= r.eigenvalues[1]);
    CHECK_THROWS_AS(top_eigenvalues(small, 0), ConfigError);
    CHECK_THROWS_AS(top_eigenvalues(small, 129), ConfigError);
  }

  TEST_CASE("semicircle stieltjes transform") {
    CHECK(std::abs(msc(Complex(2.0, 0.0)) - Complex(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(msc(Complex(0.0, 1.0)) - Complex(0.0, (std::sqrt(5.0) - 1.0) / 2.0)) < 1e-15);
    CHECK(std::abs(msc(Complex(10.0, 0.0)).real() - (-0.10102051443364424)) < 1e-15);
    CHECK(std::abs(msc(Complex(10.0, 0.0)).real() + 0.1) < 0.0011);
  }

  TEST_CASE("semicircle self-consistency and Herglotz property on a grid") {
    for (int i = 0; i < 40; ++i) {
      for (int j = 0; j < 25; ++j) {
        const Complex z(-5.0 + 10.0 * i / 39.0, std::pow(10.0, -4.0 + 5.0 * j / 24.0));
        const Complex m = msc(z);
        CHECK(std::abs(1.0 + z * m + m * m) < 1e-12);
        CHECK(m.imag() > 0.0);
      }
    }
  }

  TEST_CASE("flat profile QVE returns m_sc") {
    const Eigen::Index N = 50;
    const MatrixXd S = MatrixXd::Constant(N, N, 1.0 / N);
    for (Complex z : {Complex(0.0, 1.0), Complex(1.9, 0.01), Complex(-3.0, 0.2)}) {
      const QveResult r = solve_qve(S, z);
      for (const Complex& m : r.m) CHECK(std::abs(m - msc(z)) < 1e-12);
      CHECK(r.residual < 1e-10);
    }
  }

  TEST_CASE("perturbed profile") {
    const Eigen::Index N = 40;
    MatrixXd S = MatrixXd::Constant(N, N, 1.0 / N);
    S.row(0) *= 1.1;
    S.col(0) *= 1.1;
    const Complex z(0.5, 0.3);
    const QveResult r = solve_qve(S, z);
    CHECK(r.residual < 1e-10);
    CHECK(std::abs(r.m[0] - msc(z)) > 1e-4);
    for (const Complex& m : r.m) CHECK(m.imag() > 0.0);
    CHECK_THROWS_AS(solve_qve(S, Complex(0.5, 0.0)), ConfigError);
  }

  TEST_CASE("QVE on V(t) profiles") {
    const QveCheck q = check_qve(96, 3);
    CHECK(q.flat_max_error < 1e-12);
    CHECK(q.max_residual < 1e-10);
  }

  TEST_CASE("QVE deviation from m_sc shrinks with N") {
    const NoiseModel mix = NoiseModel::bimodal_mixture();
    const TransformMoments m = compute_moments(make_optimal(mix), mix);
    const double snr = effective_snr(0.8, m);
    const double loc = std::sqrt(snr) + 1.0 / std::sqrt(snr);
    std::vector<double> ns, devs;
    for (Eigen::Index N : {128, 256, 512}) {
      Rng rng(trial_seed(4, N));
      const Eigen::VectorXd x = sample_spike(SpikePrior::iid("gaussian"), N, rng);
      const MatrixXd S = variance_profile(x, variance_profile_coeffs(0.8, m), 1.0);
      const Complex z(loc, std::pow(double(N), -0.51));
      const QveResult r = solve_qve(S, z);
      double dev = 0.0;
      for (const Complex& mi : r.m) dev = std::max(dev, std::abs(mi - msc(z)));
      ns.push_back(double(N));
      devs.push_back(dev);
    }
    CHECK(loglog_slope(ns, devs) < -0.5);
  }

  TEST_CASE("resolvent of the zero matrix") {
    const LocalLawDeviation d = local_law_deviation(MatrixXd::Zero(4, 4), Complex(0.0, 1.0));
    CHECK(std::abs(d.max_diag_dev - std::abs(Complex(0.0, 1.0) - msc(Complex(0.0, 1.0)))) < 1e-15);
    CHECK(d.max_offdiag == 0.0);
  }

  TEST_CASE("resolvent trace identity") {
    const MatrixXd S = random_symmetric(200, 19);
    const Complex z(0.3, 0.05);
    const LocalLawDeviation d = local_law_deviation(S, z);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    Complex tr = 0.0;
    for (double mu : es.eigenvalues()) tr += 1.0 / (mu - z);
    CHECK(std::abs(d.trace - tr) < 1e-8);
  }

  TEST_CASE("real z on the spectrum is refused") {
    MatrixXd D = MatrixXd::Zero(3, 3);
    D.diagonal() << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(local_law_deviation(D, Complex(2.0, 0.0)), NumericalError);
    CHECK_THROWS_AS(local_law_deviation(D, Complex(2.0, -0.1)), ConfigError);
  }

  TEST_CASE("edge local-law deviation shrinks with N") {
    auto median_dev = [](int N) {
      std::vector<double> devs;
      for (std::uint64_t s = 0; s < 5; ++s) {
        const MatrixXd W = random_symmetric(N, 500 + s);
        devs.push_back(local_law_deviation(W, Complex(2.0, std::pow(N, -2.0 / 3.0 - 0.01))).max_diag_dev);
      }
      std::sort(devs.begin(), devs.end());
      return devs[2];
    };
    const double small = median_dev(64);
    const double large = median_dev(1024);
    CHECK(std::isfinite(large));
    CHECK(large < small);
  }

  TEST_CASE("supercritical local-law deviation for H shrinks with N") {
    const NoiseModel mix = NoiseModel::bimodal_mixture();
    const Transform opt = make_optimal(mix);
    const TransformMoments m = compute_moments(opt, mix);
    const double snr = effective_snr(0.8, m);
    const double loc = std::sqrt(snr) + 1.0 / std::sqrt(snr);
    auto median_dev = [&](int N) {
      std::vector<double> devs;
      for (std::uint64_t s = 0; s < 3; ++s) {
        const SpikedSample smp = draw_sample(mix, SpikePrior::rademacher(), N, 0.8, 60 + s);
        devs.push_back(
            local_law_deviation(build_H(smp, opt, m), Complex(loc, std::pow(N, -0.51))).max_diag_dev);
      }
      std::sort(devs.begin(), devs.end());
      return devs[1];
    };
    CHECK(median_dev(1024) < median_dev(128));
  }
}
