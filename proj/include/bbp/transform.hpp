#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bbp/noise.hpp"

namespace bbp {

/// Entrywise map f together with f', f'', f'''.
class Transform {
 public:
  using Fn = std::function<double(double)>;
  enum class Provenance { polynomial, optimal_score, custom };

  /// Derivatives that are left empty fall back to central differences.
  /// Pass approximate = true when the given derivatives are themselves numerical.
  Transform(Fn f, Fn d1, Fn d2, Fn d3, Provenance provenance, std::string label,
            bool normalized = false, bool approximate = false);

  double operator()(double x) const { return fns_[0](x); }
  /// k-th derivative, k in 0..3.
  double derivative(int k, double x) const;

  Provenance provenance() const { return provenance_; }
  const std::string& label() const { return label_; }
  bool normalized() const { return normalized_; }
  /// Some derivative carries finite-difference rounding noise.
  bool approximate() const { return approximate_; }
  /// Ascending coefficients, only for polynomial transforms.
  const std::optional<std::vector<double>>& coefficients() const { return coeffs_; }

  /// x -> scale * (f(x) - shift). Closed-form derivatives are kept.
  Transform affine(double scale, double shift, bool normalized) const;

 private:
  friend Transform make_polynomial(std::vector<double> coeffs);

  std::array<Fn, 4> fns_;
  Provenance provenance_;
  std::string label_;
  bool normalized_;
  bool approximate_;
  std::optional<std::vector<double>> coeffs_;
};

/// Polynomial with ascending coefficients c0 + c1 x + c2 x^2 + ...
Transform make_polynomial(std::vector<double> coeffs);
Transform make_identity();
/// Custom transform from f alone; derivatives by central differences.
Transform make_custom(std::string label, Transform::Fn f);
/// f = score / sqrt(F_h), the SNR-optimal map for the given noise.
Transform make_optimal(const NoiseModel& model);

/// x -> s (f(x) - E f) with s = +-1/sqrt(Var f), sign chosen so E[f'] >= 0.
Transform normalize(const Transform& t, const NoiseModel& model);

/// Scalar functionals of (f, noise) that the rest of the library needs.
struct TransformMoments {
  std::array<double, 4> derivative{};  ///< E[f^(k)], k = 0..3
  double second = 0.0;                 ///< E[f^2]
  double f_d1 = 0.0;                   ///< E[f f']
  double d1_sq = 0.0;                  ///< E[(f')^2]
  double f_d2 = 0.0;                   ///< E[f f'']
};

TransformMoments compute_moments(const Transform& t, const NoiseModel& model);

double derivative_moment(const Transform& t, const NoiseModel& model, int k);

/// Checks the normalization conventions E f = 0, E f^2 = 1, E f' >= 0.
/// Throws ConfigError describing the first violation.
void check_normalized(const TransformMoments& m);

/// lambda (E f')^2
double effective_snr(double lambda, const TransformMoments& m);
double effective_snr(double lambda, const Transform& t, const NoiseModel& model);

/// (E f')^-2. Throws NumericalError when E f' vanishes.
double detection_threshold(const TransformMoments& m, double zero_threshold = 1e-8);
double detection_threshold(const Transform& t, const NoiseModel& model);

struct VarianceCoeffs {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Coefficients of N E[V_ij^2] = 1 + C1 sqrt(N) x_i x_j + C2 N x_i^2 x_j^2.
VarianceCoeffs variance_profile_coeffs(double lambda, const TransformMoments& m);
VarianceCoeffs variance_profile_coeffs(double lambda, const Transform& t, const NoiseModel& model);

/// Smallest k in 1..3 with |E f^(k)| > zero_threshold.
int critical_index(const TransformMoments& m, double zero_threshold = 1e-8);
int critical_index(const Transform& t, const NoiseModel& model, double zero_threshold = 1e-8);

/// Named transform presets: "identity", "quadratic" ((x^2+3x-1)/sqrt11),
/// "hermite2" ((x^2-1)/sqrt2), "optimal".
Transform transform_preset(const std::string& name, const NoiseModel& model);

}  // namespace bbp
