#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace bbp {

using Complex = std::complex<double>;

struct SpectralResult {
  enum class Method { full_tridiagonal, iterative_topk };
  std::vector<double> eigenvalues;     ///< descending
  std::vector<double> residual_norms;  ///< ||S v - mu v||_2 per pair
  Method method = Method::full_tridiagonal;
  int iterations = 0;                  ///< Krylov dimension used by the iterative path
};

struct EigenOptions {
  /// Dimension from which the Lanczos path is tried first.
  Eigen::Index iterative_from = 512;
  /// Largest Krylov basis before giving up and falling back to a full solve.
  int max_krylov = 600;
  /// Convergence target on the residual, relative to ||S||_F.
  double rel_tol = 1e-11;
};

/// k largest eigenvalues with residual certificates.
SpectralResult top_eigenvalues(const Eigen::MatrixXd& S, Eigen::Index k,
                               const EigenOptions& options = {});

/// Dense Householder tridiagonalization + implicit QR.
SpectralResult full_top_eigenvalues(const Eigen::MatrixXd& S, Eigen::Index k);

/// Lanczos with full reorthogonalization. Returns an empty result if it does
/// not converge within options.max_krylov steps.
SpectralResult lanczos_top_eigenvalues(const Eigen::MatrixXd& S, Eigen::Index k,
                                       const EigenOptions& options = {});

/// Stieltjes transform of the semicircle law, Im z >= 0.
Complex msc(Complex z);

struct QveOptions {
  double damping = 0.5;
  int max_iterations = 10000;
  double tol = 1e-12;
};

struct QveResult {
  std::vector<Complex> m;
  double residual = 0.0;  ///< max_i |1 + m_i (z + sum_j S_ij m_j)|
  int iterations = 0;
};

/// Solves -1/m_i = z + sum_j S_ij m_j for Im z > 0 by damped fixed-point
/// iteration started from m_sc(z).
QveResult solve_qve(const Eigen::MatrixXd& profile, Complex z, const QveOptions& options = {});

struct LocalLawDeviation {
  double max_diag_dev = 0.0;  ///< max_i |G_ii - m_sc(z)|
  double max_offdiag = 0.0;   ///< max_{i != j} |G_ij|
  Complex trace;              ///< sum_i G_ii
};

/// Resolvent G = (S - z)^{-1} by one LU factorization, compared with m_sc.
LocalLawDeviation local_law_deviation(const Eigen::MatrixXd& S, Complex z);

}  // namespace bbp
