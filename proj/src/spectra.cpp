#include "bbp/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bbp/error.hpp"
#include "bbp/rng.hpp"

namespace bbp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_request(const MatrixXd& S, Index k) {
  if (S.rows() != S.cols()) throw ConfigError("eigensolver: matrix must be square");
  if (k < 1 || k > S.rows()) throw ConfigError("eigensolver: need 1 <= k <= N");
}

}  // namespace

SpectralResult full_top_eigenvalues(const MatrixXd& S, Index k) {
  check_request(S, k);
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(S, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolver failed");
  const Index N = S.rows();
  SpectralResult out;
  out.method = SpectralResult::Method::full_tridiagonal;
  for (Index i = 0; i < k; ++i) {
    const Index idx = N - 1 - i;
    const double mu = solver.eigenvalues()[idx];
    const VectorXd v = solver.eigenvectors().col(idx);
    out.eigenvalues.push_back(mu);
    out.residual_norms.push_back((S * v - mu * v).norm());
  }
  return out;
}

SpectralResult lanczos_top_eigenvalues(const MatrixXd& S, Index k, const EigenOptions& options) {
  check_request(S, k);
  const Index N = S.rows();
  const Index max_dim = std::min<Index>(N, std::max<Index>(options.max_krylov, k + 1));
  const double target = options.rel_tol * S.norm();

  MatrixXd Q(N, max_dim);
  std::vector<double> alpha;
  std::vector<double> beta;
  alpha.reserve(max_dim);
  beta.reserve(max_dim);

  // Fixed start vector so that the solver is a deterministic function of S.
  {
    Rng rng(0x5eed1a2c05ULL);
    std::normal_distribution<double> normal;
    VectorXd q(N);
    for (Index i = 0; i < N; ++i) q[i] = normal(rng);
    Q.col(0) = q / q.norm();
  }

  VectorXd w(N);
  VectorXd coef;
  Index next_check = std::max<Index>(k + 1, 10);
  for (Index j = 0; j < max_dim; ++j) {
    w.noalias() = S * Q.col(j);
    alpha.push_back(Q.col(j).dot(w));
    w -= alpha.back() * Q.col(j);
    if (j > 0) w -= beta.back() * Q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      coef.noalias() = Q.leftCols(j + 1).transpose() * w;
      w.noalias() -= Q.leftCols(j + 1) * coef;
    }
    const double b = w.norm();
    const Index m = j + 1;
    const bool exhausted = b <= 1e-14 * std::max(1.0, std::abs(alpha.back()));
    const bool check = exhausted || m == max_dim || (m >= k && m >= next_check);
    if (!check) {
      beta.push_back(b);
      Q.col(m) = w / b;
      continue;
    }
    if (m < k) break;

    Eigen::SelfAdjointEigenSolver<MatrixXd> tri;
    VectorXd diag = Eigen::Map<const VectorXd>(alpha.data(), m);
    VectorXd sub = m > 1 ? VectorXd(Eigen::Map<const VectorXd>(beta.data(), m - 1)) : VectorXd();
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (tri.info() != Eigen::Success) break;

    bool converged = true;
    for (Index i = 0; i < k; ++i) {
      const double bound = std::abs(b * tri.eigenvectors()(m - 1, m - 1 - i));
      if (!exhausted && bound > target) converged = false;
    }
    if (converged) {
      SpectralResult out;
      out.method = SpectralResult::Method::iterative_topk;
      out.iterations = static_cast<int>(m);
      for (Index i = 0; i < k; ++i) {
        const double mu = tri.eigenvalues()[m - 1 - i];
        VectorXd v = Q.leftCols(m) * tri.eigenvectors().col(m - 1 - i);
        v /= v.norm();
        out.eigenvalues.push_back(mu);
        out.residual_norms.push_back((S * v - mu * v).norm());
      }
      return out;
    }
    if (exhausted || m == max_dim) break;
    beta.push_back(b);
    Q.col(m) = w / b;
    next_check = m + std::max<Index>(5, m / 8);
  }
  return {};
}

SpectralResult top_eigenvalues(const MatrixXd& S, Index k, const EigenOptions& options) {
  check_request(S, k);
  if (S.rows() >= options.iterative_from) {
    SpectralResult result = lanczos_top_eigenvalues(S, k, options);
    if (!result.eigenvalues.empty()) {
      const double bound = 1e-9 * S.norm();
      bool certified = true;
      for (std::size_t i = 0; i < result.eigenvalues.size(); ++i) {
        if (result.residual_norms[i] > bound * (1.0 + std::abs(result.eigenvalues[i]))) {
          certified = false;
        }
      }
      if (certified) return result;
    }
  }
  return full_top_eigenvalues(S, k);
}

Complex msc(Complex z) {
  // sqrt(z - 2) sqrt(z + 2) is the branch of sqrt(z^2 - 4) that behaves like z
  // at infinity with its cut on [-2, 2].
  const Complex root = std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
  return 0.5 * (-z + root);
}

QveResult solve_qve(const MatrixXd& profile, Complex z, const QveOptions& options) {
  if (!(z.imag() > 0.0)) throw ConfigError("quadratic vector equation needs Im z > 0");
  if (profile.rows() != profile.cols()) throw ConfigError("variance profile must be square");
  if (profile.minCoeff() < 0.0) throw ConfigError("variance profile must be non-negative");
  const Index N = profile.rows();
  const Complex start = msc(z);
  VectorXd re = VectorXd::Constant(N, start.real());
  VectorXd im = VectorXd::Constant(N, start.imag());
  VectorXd sre(N);
  VectorXd sim(N);

  QveResult out;
  const double d = options.damping;
  for (int it = 0;; ++it) {
    sre.noalias() = profile * re;
    sim.noalias() = profile * im;
    double residual = 0.0;
    for (Index i = 0; i < N; ++i) {
      const Complex m(re[i], im[i]);
      const Complex denom = z + Complex(sre[i], sim[i]);
      residual = std::max(residual, std::abs(1.0 + m * denom));
    }
    out.residual = residual;
    out.iterations = it;
    if (residual < options.tol) break;
    if (it >= options.max_iterations || !std::isfinite(residual)) {
      if (residual < 1e-10) break;
      std::ostringstream os;
      os << "quadratic vector equation did not converge after " << it
         << " iterations; last residual " << residual;
      throw NumericalError(os.str());
    }
    for (Index i = 0; i < N; ++i) {
      const Complex update = -1.0 / (z + Complex(sre[i], sim[i]));
      const Complex m = (1.0 - d) * Complex(re[i], im[i]) + d * update;
      re[i] = m.real();
      im[i] = m.imag();
    }
  }
  out.m.resize(N);
  for (Index i = 0; i < N; ++i) out.m[i] = Complex(re[i], im[i]);
  return out;
}

LocalLawDeviation local_law_deviation(const MatrixXd& S, Complex z) {
  if (S.rows() != S.cols()) throw ConfigError("local law: matrix must be square");
  if (z.imag() < 0.0) throw ConfigError("local law: need Im z >= 0");
  const Index N = S.rows();
  if (z.imag() == 0.0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(S, Eigen::EigenvaluesOnly);
    const double gap = (solver.eigenvalues().array() - z.real()).abs().minCoeff();
    if (gap < 1e-12) throw NumericalError("local law: z lies on the spectrum");
  }
  Eigen::MatrixXcd shifted = S.cast<Complex>();
  shifted.diagonal().array() -= z;
  const Eigen::MatrixXcd G = shifted.partialPivLu().inverse();
  const Complex m = msc(z);
  LocalLawDeviation out;
  out.trace = G.diagonal().sum();
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i < N; ++i) {
      if (i == j) {
        out.max_diag_dev = std::max(out.max_diag_dev, std::abs(G(i, i) - m));
      } else {
        out.max_offdiag = std::max(out.max_offdiag, std::abs(G(i, j)));
      }
    }
  }
  return out;
}

}  // namespace bbp
