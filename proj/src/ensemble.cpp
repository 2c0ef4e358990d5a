#include "bbp/ensemble.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "bbp/error.hpp"

namespace bbp {

using Eigen::Index;

double SpikePrior::fourth_moment() const {
  switch (kind) {
    case Kind::iid_rademacher:
      return 1.0;
    case Kind::spherical:
      return 3.0;
    case Kind::iid_custom:
      if (entry_law == "gaussian") return 3.0;
      if (entry_law == "uniform") return 9.0 / 5.0;
      if (entry_law == "rademacher") return 1.0;
      break;
  }
  throw ConfigError("unknown spike entry law '" + entry_law + "'");
}

std::string SpikePrior::name() const {
  switch (kind) {
    case Kind::iid_rademacher:
      return "rademacher";
    case Kind::spherical:
      return "spherical";
    case Kind::iid_custom:
      return "iid-" + entry_law;
  }
  return "unknown";
}

Vector sample_spike(const SpikePrior& prior, Index N, Rng& rng) {
  if (N < 2) throw ConfigError("spike dimension must be at least 2");
  Vector x(N);
  const double inv = 1.0 / std::sqrt(static_cast<double>(N));
  switch (prior.kind) {
    case SpikePrior::Kind::iid_rademacher:
      for (Index i = 0; i < N; ++i) x[i] = (rng() & 1ULL) ? inv : -inv;
      return x;
    case SpikePrior::Kind::spherical: {
      std::normal_distribution<double> normal;
      for (Index i = 0; i < N; ++i) x[i] = normal(rng);
      return x / x.norm();
    }
    case SpikePrior::Kind::iid_custom: {
      if (prior.entry_law == "gaussian") {
        std::normal_distribution<double> normal;
        for (Index i = 0; i < N; ++i) x[i] = inv * normal(rng);
      } else if (prior.entry_law == "uniform") {
        std::uniform_real_distribution<double> uniform(-std::sqrt(3.0), std::sqrt(3.0));
        for (Index i = 0; i < N; ++i) x[i] = inv * uniform(rng);
      } else if (prior.entry_law == "rademacher") {
        for (Index i = 0; i < N; ++i) x[i] = (rng() & 1ULL) ? inv : -inv;
      } else {
        throw ConfigError("unknown spike entry law '" + prior.entry_law + "'");
      }
      if (prior.post_normalize) x /= x.norm();
      return x;
    }
  }
  return x;
}

Matrix sample_wigner(const NoiseModel& model, Index N, Rng& rng) {
  if (N < 2) throw ConfigError("matrix dimension must be at least 2");
  std::vector<double> draws(static_cast<std::size_t>(N * (N + 1) / 2));
  model.fill(rng, draws);
  const double inv = 1.0 / std::sqrt(static_cast<double>(N));
  Matrix W(N, N);
  std::size_t k = 0;
  for (Index i = 0; i < N; ++i) {
    for (Index j = i; j < N; ++j) {
      const double v = inv * draws[k++];
      W(i, j) = v;
      W(j, i) = v;
    }
  }
  return W;
}

SpikedSample draw_sample(const NoiseModel& model, const SpikePrior& prior, Index N, double lambda,
                         std::uint64_t seed) {
  if (lambda < 0.0) throw ConfigError("SNR must be non-negative");
  Rng rng(seed);
  SpikedSample s;
  s.N = N;
  s.lambda = lambda;
  s.seed = seed;
  s.W = sample_wigner(model, N, rng);
  s.x = sample_spike(prior, N, rng);
  return s;
}

Matrix assemble(const Matrix& W, const Vector& x, double lambda) {
  const Index N = W.rows();
  if (W.cols() != N || x.size() != N) throw ConfigError("assemble: shape mismatch");
  const double root = std::sqrt(lambda);
  Matrix M(N, N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = W(i, j) + root * x[i] * x[j];
      M(i, j) = v;
      M(j, i) = v;
    }
  }
  return M;
}

Matrix transform_entrywise(const Matrix& M, const Transform& t) {
  const Index N = M.rows();
  const double sn = std::sqrt(static_cast<double>(N));
  Matrix out(N, N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = t(sn * M(i, j)) / sn;
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

namespace {

// Deterministic rank-2 part sqrt(lambda) E[f'] x_i x_j + (lambda/2) E[f''] sqrt(N) x_i^2 x_j^2.
struct SpikeTerm {
  double a;
  double c;
  double operator()(double xi, double xj) const { return a * xi * xj + c * (xi * xi) * (xj * xj); }
};

SpikeTerm spike_term(Index N, double lambda, const TransformMoments& m) {
  return {std::sqrt(lambda) * m.derivative[1],
          0.5 * lambda * m.derivative[2] * std::sqrt(static_cast<double>(N))};
}

double profile_entry(const VarianceCoeffs& c, double tpoint, double sn, double xi, double xj) {
  const double p = xi * xj;
  return 1.0 + c.c1 * tpoint * sn * p + c.c2 * tpoint * (sn * sn) * (p * p);
}

}  // namespace

Matrix build_H(const SpikedSample& s, const Transform& t, const TransformMoments& m) {
  const Index N = s.N;
  const double sn = std::sqrt(static_cast<double>(N));
  const double root = std::sqrt(s.lambda);
  const SpikeTerm spike{0.0, spike_term(N, s.lambda, m).c};
  Matrix H(N, N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double y = sn * s.W(i, j);
      const double v = t(y) / sn + root * t.derivative(1, y) * s.x[i] * s.x[j] +
                       spike(s.x[i], s.x[j]);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

Matrix build_V(const SpikedSample& s, const Transform& t, const TransformMoments& m) {
  const Index N = s.N;
  const double sn = std::sqrt(static_cast<double>(N));
  const double root = std::sqrt(s.lambda);
  const double mean_d1 = m.derivative[1];
  Matrix V(N, N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double y = sn * s.W(i, j);
      const double v = t(y) / sn + root * (t.derivative(1, y) - mean_d1) * s.x[i] * s.x[j];
      V(i, j) = v;
      V(j, i) = v;
    }
  }
  return V;
}

Matrix variance_profile(const Vector& x, const VarianceCoeffs& c, double tpoint) {
  const Index N = x.size();
  const double sn = std::sqrt(static_cast<double>(N));
  Matrix S(N, N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = profile_entry(c, tpoint, sn, x[i], x[j]) / static_cast<double>(N);
      S(i, j) = v;
      S(j, i) = v;
    }
  }
  return S;
}

Interpolants build_interpolants(const SpikedSample& s, const Transform& t,
                                const TransformMoments& m, double tpoint) {
  if (!(tpoint >= 0.0 && tpoint <= 1.0)) throw ConfigError("interpolation time must lie in [0, 1]");
  const Index N = s.N;
  const double sn = std::sqrt(static_cast<double>(N));
  const VarianceCoeffs coeffs = variance_profile_coeffs(s.lambda, m);
  const SpikeTerm spike = spike_term(N, s.lambda, m);
  Interpolants out;
  out.Vt = build_V(s, t, m);
  out.Ht.resize(N, N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double full = profile_entry(coeffs, 1.0, sn, s.x[i], s.x[j]);
      const double partial = profile_entry(coeffs, tpoint, sn, s.x[i], s.x[j]);
      if (!(full > 1e-300) || partial < 0.0) {
        std::ostringstream os;
        os << "interpolation: entry (" << i << "," << j << ") has non-positive variance ("
           << full << ", " << partial << ")";
        throw NumericalError(os.str());
      }
      const double v = std::sqrt(partial / full) * out.Vt(i, j);
      out.Vt(i, j) = v;
      out.Vt(j, i) = v;
      const double h = v + spike(s.x[i], s.x[j]);
      out.Ht(i, j) = h;
      out.Ht(j, i) = h;
    }
  }
  return out;
}

std::pair<double, double> rank2_eigenvalues(const Vector& x, double lambda,
                                            const TransformMoments& m) {
  const SpikeTerm spike = spike_term(x.size(), lambda, m);
  const Vector y = x.cwiseProduct(x);
  const double xx = x.squaredNorm();
  const double yy = y.squaredNorm();
  const double xy = x.dot(y);
  // Nontrivial eigenvalues of a x x^T + c y y^T are those of diag(a, c) times
  // the Gram matrix of (x, y).
  const double p = spike.a * xx;
  const double q = spike.c * yy;
  const double trace = p + q;
  const double det = spike.a * spike.c * (xx * yy - xy * xy);
  const double disc = std::max(0.0, (p - q) * (p - q) + 4.0 * spike.a * spike.c * xy * xy);
  const double root = std::sqrt(disc);
  double hi = 0.0;
  double lo = 0.0;
  if (trace >= 0.0) {
    hi = 0.5 * (trace + root);
    lo = hi != 0.0 ? det / hi : 0.0;
  } else {
    lo = 0.5 * (trace - root);
    hi = lo != 0.0 ? det / lo : 0.0;
  }
  return {hi, lo};
}

Rank2Spike rank2_spike(const Vector& x, double lambda, const TransformMoments& m) {
  const Index N = x.size();
  const SpikeTerm spike = spike_term(N, lambda, m);
  Rank2Spike out;
  out.A.resize(N, N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = spike(x[i], x[j]);
      out.A(i, j) = v;
      out.A(j, i) = v;
    }
  }
  std::tie(out.theta1, out.theta2) = rank2_eigenvalues(x, lambda, m);
  return out;
}

SpikeDiagnostics check_spike(const Vector& x) {
  const double N = static_cast<double>(x.size());
  SpikeDiagnostics d;
  d.max_scaled = std::sqrt(N) * x.cwiseAbs().maxCoeff();
  d.sum = std::abs(x.sum());
  d.sum_cubes_scaled = N * std::abs(x.array().cube().sum());
  const double bound = 10.0 * std::log(N);
  d.flagged = d.max_scaled > bound || d.sum > bound || d.sum_cubes_scaled > bound;
  return d;
}

}  // namespace bbp
