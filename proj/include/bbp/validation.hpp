#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace bbp {

/// Closed-form rank-2 eigenvalues against a dense eigendecomposition of A on
/// random (x, lambda, transform) instances.
struct Rank2Check {
  int instances = 0;
  double max_error = 0.0;
};
Rank2Check check_rank2_closed_form(int instances, Eigen::Index N, std::uint64_t seed);

/// Large-N behaviour of the rank-2 eigenvalues for the quadratic transform on
/// Gaussian noise with iid spikes: theta1 against sqrt(lambda_e), theta2 against 0.
struct Rank2Asymptotics {
  int draws = 0;
  double frac_theta1 = 0.0;  ///< fraction with |theta1 - sqrt(lambda_e)| <= 5 / N
  double frac_theta2 = 0.0;  ///< fraction with |theta2| <= 5 / sqrt(N)
  double worst_theta1 = 0.0;
  double worst_theta2_scaled = 0.0;  ///< max sqrt(N) |theta2|
};
Rank2Asymptotics check_rank2_asymptotics(int draws, Eigen::Index N, std::uint64_t seed);

struct QveCheck {
  double flat_max_error = 0.0;  ///< max |m_i - m_sc| on the flat profile
  double max_residual = 0.0;    ///< worst residual over all profiles and z
  int solves = 0;
};
QveCheck check_qve(Eigen::Index N, std::uint64_t seed);

struct LocalLawRow {
  Eigen::Index N = 0;
  double supercritical = 0.0;  ///< median max_i |G_ii - m_sc| for H at its outlier window
  double subcritical = 0.0;    ///< median max_i |R_ii - m_sc| for V at the edge window
};
struct LocalLawTrend {
  std::vector<LocalLawRow> rows;
  double slope_supercritical = 0.0;  ///< least-squares slope of log deviation against log N
  double slope_subcritical = 0.0;
};
LocalLawTrend local_law_trend(const std::vector<Eigen::Index>& sizes, int draws, double epsilon,
                              std::uint64_t seed);

struct ApproxRow {
  Eigen::Index N = 0;
  double median_gap = 0.0;  ///< median |mu1(M~) - mu1(H)|
};
/// Mixture-optimal transform at lambda = 0.8.
std::vector<ApproxRow> approximation_gap(const std::vector<Eigen::Index>& sizes, int trials,
                                         std::uint64_t seed);

/// Interpolation identities on one draw per (transform, t).
struct InterpolationCheck {
  bool v1_bitwise = true;
  double max_spike_error = 0.0;  ///< max |H(t) - V(t) - A| over t in {0, 0.5, 1}
  int draws = 0;
  int ordering_violations = 0;   ///< draws with E f'' >= 0 and mu1(H) < mu1(V)
};
InterpolationCheck check_interpolation(int draws, Eigen::Index N, std::uint64_t seed);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bbp
