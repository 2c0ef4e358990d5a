#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "bbp/noise.hpp"
#include "bbp/rng.hpp"
#include "bbp/transform.hpp"

namespace bbp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SpikePrior {
  enum class Kind { iid_rademacher, iid_custom, spherical };
  Kind kind = Kind::iid_rademacher;
  /// Entry law for iid_custom: "gaussian" or "uniform" (unit variance).
  std::string entry_law = "gaussian";
  /// Rescale the draw to exact unit norm.
  bool post_normalize = true;

  static SpikePrior rademacher() { return {}; }
  static SpikePrior spherical() { return {Kind::spherical, "gaussian", true}; }
  static SpikePrior iid(std::string law, bool post_normalize = true) {
    return {Kind::iid_custom, std::move(law), post_normalize};
  }

  /// E[(sqrt(N) x_i)^4] of the entry law (the w4 of the scaled regime).
  double fourth_moment() const;
  std::string name() const;
};

/// One draw of the spiked model M = W + sqrt(lambda) x x^T.
struct SpikedSample {
  Eigen::Index N = 0;
  Matrix W;
  Vector x;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

Vector sample_spike(const SpikePrior& prior, Eigen::Index N, Rng& rng);

/// Symmetric W with sqrt(N) W_ij i.i.d. from the model for i <= j; the
/// diagonal follows the same law as the off-diagonal entries.
Matrix sample_wigner(const NoiseModel& model, Eigen::Index N, Rng& rng);

/// Draws W then x from a generator seeded with `seed`.
SpikedSample draw_sample(const NoiseModel& model, const SpikePrior& prior, Eigen::Index N,
                         double lambda, std::uint64_t seed);

Matrix assemble(const Matrix& W, const Vector& x, double lambda);

/// N^{-1/2} f(sqrt(N) M_ij), computed on the upper triangle and mirrored.
Matrix transform_entrywise(const Matrix& M, const Transform& t);

/// Taylor approximation H of the transformed matrix.
Matrix build_H(const SpikedSample& s, const Transform& t, const TransformMoments& m);

/// Wigner-type noise part V of H.
Matrix build_V(const SpikedSample& s, const Transform& t, const TransformMoments& m);

/// N E[V(t)_ij^2] = 1 + C1 t sqrt(N) x_i x_j + C2 t N x_i^2 x_j^2.
Matrix variance_profile(const Vector& x, const VarianceCoeffs& c, double tpoint);

struct Interpolants {
  Matrix Vt;
  Matrix Ht;
};

/// V(t) and H(t) for t in [0, 1]. V(1) equals build_V bitwise.
Interpolants build_interpolants(const SpikedSample& s, const Transform& t,
                                const TransformMoments& m, double tpoint);

struct Rank2Spike {
  Matrix A;
  double theta1 = 0.0;  ///< larger nontrivial eigenvalue
  double theta2 = 0.0;  ///< smaller nontrivial eigenvalue (negative when E f'' < 0)
};

/// A = sqrt(lambda) E[f'] x x^T + (lambda/2) E[f''] sqrt(N) x^2 (x^2)^T with
/// its two nontrivial eigenvalues in closed form.
Rank2Spike rank2_spike(const Vector& x, double lambda, const TransformMoments& m);

/// Only the two nontrivial eigenvalues, without forming A.
std::pair<double, double> rank2_eigenvalues(const Vector& x, double lambda,
                                            const TransformMoments& m);

struct SpikeDiagnostics {
  double max_scaled = 0.0;       ///< sqrt(N) max |x_i|
  double sum = 0.0;              ///< |sum x_i|
  double sum_cubes_scaled = 0.0; ///< N |sum x_i^3|
  bool flagged = false;          ///< any of the above exceeds 10 log N
};

SpikeDiagnostics check_spike(const Vector& x);

}  // namespace bbp
