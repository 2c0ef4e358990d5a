#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
// pchip.hpp in Boost 1.74 uses unqualified isnan.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include "bbp/error.hpp"
#include "bbp/transform.hpp"

namespace bbp {

/// Raised when |lambda_e - 1| is inside the near-critical margin.
class NearCriticalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class Regime { supercritical, subcritical, scaled_k2, no_theory };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

double gaussian_cdf(double s, double mean, double variance);
double gaussian_pdf(double s, double mean, double variance);

/// GOE Tracy-Widom distribution function on a fixed grid with monotone
/// cubic (PCHIP) interpolation.
class Tw1Table {
 public:
  static constexpr double kMin = -10.0;
  static constexpr double kMax = 6.0;

  /// Parses `s,cdf` CSV text. Throws ConfigError on malformed or
  /// non-increasing data.
  static Tw1Table from_csv(const std::string& text);
  /// The table shipped with the library.
  static const Tw1Table& shipped();

  /// Clamps to 0 / 1 outside the grid and sets *tail when it does.
  double cdf(double s, bool* tail = nullptr) const;
  double pdf(double s) const;
  /// Bisection on the interpolated cdf, 0 < q < 1.
  double quantile(double q) const;
  double mean() const;
  double variance() const;

  const std::vector<double>& grid() const { return s_; }
  const std::vector<double>& values() const { return cdf_; }

 private:
  std::vector<double> s_;
  std::vector<double> cdf_;
  using Interpolant = boost::math::interpolators::pchip<std::vector<double>>;
  std::shared_ptr<const Interpolant> interp_;
};

/// F_1(s) = det(I - K_s) with K_s(u, v) = Ai(s + u + v) on L^2(0, inf),
/// discretized by an m-point Gauss-Legendre rule.
double tw1_fredholm_cdf(double s, int nodes = 80);

/// Left-tail asymptotic tau_1 |s|^{-1/16} exp(-|s|^3/24 - |s|^{3/2}/(3 sqrt 2)).
double tw1_left_tail(double s);

struct TwTableReport {
  std::string csv;
  double max_refinement_delta = 0.0;  ///< |m nodes - 2m nodes| over the grid
  double max_interpolation_delta = 0.0;  ///< half-step midpoints vs interpolation
};

/// Regenerates the shipped table from the Fredholm oracle.
TwTableReport generate_tw1_table(double step = 0.01, int nodes = 80);

/// CRC-32 of the shipped CSV text and the value recorded alongside it.
unsigned long shipped_tw1_crc32();
unsigned long recorded_tw1_crc32();
unsigned long crc32_of(const std::string& text);

double tw1_cdf(double s);
double tw1_quantile(double q);

struct ReferenceLaw {
  enum class Kind { gaussian, tracy_widom_goe, none };
  Kind kind = Kind::none;
  double mean = 0.0;
  double variance = 0.0;

  double cdf(double s) const;
  double pdf(double s) const;
  std::string name() const;
};

struct TheoryPrediction {
  Regime regime = Regime::no_theory;
  double effective_snr = 0.0;
  double location = 2.0;
  double scale_exponent = -0.5;
  ReferenceLaw law;
  /// Mean of the limiting law in the scaled regime (zero otherwise).
  double shift = 0.0;
  /// Finite-N centering offset c: mu_1 is centered at location + c / sqrt(N).
  double edge_offset = 0.0;
  double detection_threshold = 0.0;

  double centering(Eigen::Index N) const;
  double rescale(double mu1, Eigen::Index N) const;
  double unrescale(double rescaled, Eigen::Index N) const;
};

/// Fixed-SNR prediction. Throws NearCriticalError when |lambda_e - 1| < margin.
TheoryPrediction predict(double lambda, const TransformMoments& m, double margin = 0.05);

/// lambda = lambda0 sqrt(N) prediction for k_f = 2; w4 = E[(sqrt(N) x_i)^4].
TheoryPrediction predict_scaled(double lambda0, const TransformMoments& m, double w4,
                                double margin = 0.05, double zero_threshold = 1e-8);

/// The mean-shift coefficient C2 = E f^2 + E f f'' - E f E f'' of the scaled regime.
double scaled_c2(const TransformMoments& m);

}  // namespace bbp
