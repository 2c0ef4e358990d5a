#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbp/rng.hpp"

namespace bbp {

/// Law of the normalized noise entries sqrt(N) W_ij.
///
/// Built-in laws have closed-form density, score and sampler. Custom laws
/// supply only a density; the score falls back to central differences of
/// log p and sampling to rejection over the integration window.
///
/// Instances are immutable once constructed and may be shared across threads.
class NoiseModel {
 public:
  enum class Kind { standard_gaussian, gaussian_rademacher_mixture, custom_density };

  static NoiseModel standard_gaussian();
  /// a * Z + b * R with Z standard normal and R a Rademacher sign; a^2 + b^2 = 1.
  static NoiseModel mixture(double a, double b);
  /// The default bimodal law (a = 1/sqrt5, b = 2/sqrt5).
  static NoiseModel bimodal_mixture();
  static NoiseModel custom(std::string name, std::function<double(double)> pdf, double window);
  /// Named presets: "gaussian", "mixture", "logistic".
  static NoiseModel preset(std::string_view name);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::span<const double> params() const { return params_; }
  /// Integration window [-w, w].
  double window() const { return window_; }

  double pdf(double x) const;
  /// -p'(x) / p(x). Throws NumericalError("tail evaluation") where p underflows.
  double score(double x) const;
  /// k-th derivative of the score, k in 0..3.
  double score_derivative(int k, double x) const;
  double fisher_information() const { return fisher_; }

  /// E[g(X)] by adaptive quadrature over the window, absolute tolerance 1e-9
  /// unless a looser one is given.
  double expect(const std::function<double(double)>& g, double abs_tol = 1e-9) const;

  double draw(Rng& rng) const;
  void fill(Rng& rng, std::span<double> out) const;
  std::vector<double> sample(Rng& rng, std::size_t n) const;

 private:
  NoiseModel() = default;
  void validate_and_cache();

  Kind kind_ = Kind::standard_gaussian;
  std::string name_;
  std::vector<double> params_;
  double window_ = 10.0;
  std::function<double(double)> custom_pdf_;
  double pdf_max_ = 0.0;
  double fisher_ = 0.0;
  double tail_limit_ = 0.0;  ///< built-in laws: largest |x| with p(x) >= DBL_MIN
};

}  // namespace bbp
