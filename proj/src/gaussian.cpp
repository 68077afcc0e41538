#include "srel/gaussian.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "srel/parallel.hpp"
#include "srel/rng.hpp"

namespace srel {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Solve q.cov * y = x via Cholesky; falls back to eigen decomposition.
struct SpdSolver {
  explicit SpdSolver(const SpdMatrix& s) : n(s.dim()) {
    have_chol = cholesky(s, lower);
    if (have_chol) {
      log_det = 0.0;
      for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(lower(i, i));
      // Cholesky succeeding does not by itself certify the kEpsSpd margin.
      Eigensystem es = eigen_decompose(s);
      check_eigen(es);
    } else {
      Eigensystem es = eigen_decompose(s);
      check_eigen(es);
      eig = std::move(es);
      log_det = 0.0;
      for (double ev : eig.eigenvalues) log_det += std::log(ev);
    }
  }

  static void check_eigen(const Eigensystem& es) {
    const double top = es.eigenvalues.front();
    if (!(top > 0.0) || es.eigenvalues.back() <= kEpsSpd * top)
      throw SingularMatrixError("reference covariance is singular");
  }

  std::vector<double> solve(const std::vector<double>& x) const {
    std::vector<double> y(x.size());
    if (have_chol) {
      // L z = x, L^T y = z
      std::vector<double> z(x.size());
      for (int i = 0; i < n; ++i) {
        double s = x[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= lower(i, k) * z[static_cast<std::size_t>(k)];
        z[static_cast<std::size_t>(i)] = s / lower(i, i);
      }
      for (int i = n - 1; i >= 0; --i) {
        double s = z[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= lower(k, i) * y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(i)] = s / lower(i, i);
      }
      return y;
    }
    // y = V diag(1/ev) V^T x
    std::vector<double> t(x.size(), 0.0);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += eig.eigenvectors(i, j) * x[static_cast<std::size_t>(i)];
      t[static_cast<std::size_t>(j)] = s / eig.eigenvalues[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += eig.eigenvectors(i, j) * t[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = s;
    }
    return y;
  }

  // tr(q_cov^{-1} a)
  double trace_solve(const SpdMatrix& a) const {
    double tr = 0.0;
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = a(i, j);
      tr += solve(col)[static_cast<std::size_t>(j)];
    }
    return tr;
  }

  int n;
  bool have_chol = false;
  Matrix lower;
  Eigensystem eig;
  double log_det = 0.0;
};

double clamp_tiny_negative(double v, double scale) {
  if (v >= 0.0) return v;
  if (v < -1e-9 * (1.0 + std::abs(scale)))
    throw std::logic_error("relative entropy produced a significantly negative value");
  return 0.0;
}

}  // namespace

std::vector<double> LognormalLaw::mean() const {
  std::vector<double> m(log_mean.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    m[i] = std::exp(log_mean[i] + 0.5 * log_cov(static_cast<int>(i), static_cast<int>(i)));
  return m;
}

SpdMatrix LognormalLaw::second_moment_about(const std::vector<double>& b) const {
  const int l = dim();
  if (static_cast<int>(b.size()) != l) throw DimensionError("second_moment_about: dimension mismatch");
  const std::vector<double> m = mean();
  Matrix s(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) {
      // E[X_i X_j] = E[X_i] E[X_j] exp(S_ij)
      const double exx = m[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(j)] * std::exp(log_cov(i, j));
      s(i, j) = exx - m[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)] -
                b[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(j)] +
                b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    }
  // exact symmetry can be lost to rounding of exp(); symmetrize explicitly
  for (int i = 0; i < l; ++i)
    for (int j = i + 1; j < l; ++j) {
      const double v = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return SpdMatrix(s);
}

double kl_gaussian(const GaussianLaw& p, const GaussianLaw& q) {
  const int l = p.dim();
  if (q.dim() != l || p.cov.dim() != l || q.cov.dim() != l)
    throw DimensionError("kl_gaussian: dimension mismatch");

  const SpdSolver qs(q.cov);
  const double log_det_p = log_det_spd(p.cov);

  std::vector<double> dmu(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) dmu[static_cast<std::size_t>(i)] = q.mean[static_cast<std::size_t>(i)] - p.mean[static_cast<std::size_t>(i)];
  const std::vector<double> y = qs.solve(dmu);
  double quad = 0.0;
  for (int i = 0; i < l; ++i) quad += dmu[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];

  const double tr = qs.trace_solve(p.cov);
  const double v = 0.5 * (tr - l + quad - (log_det_p - qs.log_det));
  return clamp_tiny_negative(v, tr + quad);
}

double kl_lognormal(const LognormalLaw& p, const LognormalLaw& q) {
  return kl_gaussian(GaussianLaw{p.log_mean, p.log_cov}, GaussianLaw{q.log_mean, q.log_cov});
}

double kl_lognormal_vs_gaussian(const LognormalLaw& p, const GaussianLaw& q) {
  const int l = p.dim();
  if (q.dim() != l) throw DimensionError("kl_lognormal_vs_gaussian: dimension mismatch");

  // E_p[log p(X)] = -log((2pi)^{l/2} det(S)^{1/2}) - sum_i m_i - l/2
  const double log_det_s = log_det_spd(p.log_cov);
  double sum_m = 0.0;
  for (double m : p.log_mean) sum_m += m;
  const double e_log_p = -0.5 * (l * kLog2Pi + log_det_s) - sum_m - 0.5 * l;

  // E_p[log q(X)] = -log((2pi)^{l/2} det(C)^{1/2}) - tr(C^{-1} E[(X-b)(X-b)^T])/2
  const SpdSolver qs(q.cov);
  const SpdMatrix m2 = p.second_moment_about(q.mean);
  const double e_log_q = -0.5 * (l * kLog2Pi + qs.log_det) - 0.5 * qs.trace_solve(m2);

  return clamp_tiny_negative(e_log_p - e_log_q, std::abs(e_log_p) + std::abs(e_log_q));
}

double log_pdf(const GaussianLaw& law, const std::vector<double>& x) {
  const int l = law.dim();
  if (static_cast<int>(x.size()) != l) throw DimensionError("log_pdf: dimension mismatch");
  const SpdSolver s(law.cov);
  std::vector<double> d(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) d[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - law.mean[static_cast<std::size_t>(i)];
  const std::vector<double> y = s.solve(d);
  double quad = 0.0;
  for (int i = 0; i < l; ++i) quad += d[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
  return -0.5 * (l * kLog2Pi + s.log_det + quad);
}

double log_pdf(const LognormalLaw& law, const std::vector<double>& x) {
  std::vector<double> lx(x.size());
  double jac = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) return -std::numeric_limits<double>::infinity();
    lx[i] = std::log(x[i]);
    jac += lx[i];
  }
  return log_pdf(GaussianLaw{law.log_mean, law.log_cov}, lx) - jac;
}

double kl_gbm_marginal_vs_bm(const Matrix& gamma, double t) {
  if (!(t > 0.0)) throw InvalidArgumentError("time must be positive");
  const int l = gamma.rows();
  const SpdMatrix gg = SpdMatrix::gram(gamma);
  const double log_det = log_det_spd(gg);  // throws if Gamma Gamma^T singular

  double row_sq = 0.0;  // tr(Gamma Gamma^T)
  double exp_term = 0.0;
  for (int i = 0; i < l; ++i) {
    const double di = gg(i, i);
    row_sq += di;
    exp_term += std::expm1(t * di) / t;
  }
  return 0.5 * (-log_det + t * row_sq - l + exp_term);
}

McEstimate chain_rule_entropy(const std::vector<StepKlFn>& step_kls,
                              const PathSamplerFn& sample_path, int dim,
                              std::int64_t paths, std::uint64_t seed, int threads) {
  (void)seed;  // sampler owns the substream derivation; kept in the signature
               // so call sites document which seed the prefixes flow from
  if (paths < 2) throw InsufficientSamplesError("chain_rule_entropy needs at least 2 paths");
  const int n_steps = static_cast<int>(step_kls.size());

  MeanAccumulator acc(paths);
  parallel_chunks(paths, threads, [&](std::int64_t chunk, std::int64_t b, std::int64_t e) {
    std::vector<double> path(static_cast<std::size_t>(n_steps + 1) * dim);
    for (std::int64_t i = b; i < e; ++i) {
      sample_path(static_cast<std::uint64_t>(i), path.data());
      double sum = 0.0;
      for (int k = 0; k < n_steps; ++k) {
        PrefixView prefix{path.data(), k + 1, dim};
        sum += step_kls[static_cast<std::size_t>(k)](prefix);
      }
      acc.add(chunk, sum);
    }
  });

  return McEstimate{acc.mean(), acc.stderr_of_mean(), paths};
}

}  // namespace srel
