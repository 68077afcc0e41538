#ifndef SREL_GAUSSIAN_HPP
#define SREL_GAUSSIAN_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "srel/errors.hpp"
#include "srel/spdlinalg.hpp"

namespace srel {

struct GaussianLaw {
  std::vector<double> mean;
  SpdMatrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Law of exp(Z) coordinatewise, Z ~ N(log_mean, log_cov).
struct LognormalLaw {
  std::vector<double> log_mean;
  SpdMatrix log_cov;

  int dim() const { return static_cast<int>(log_mean.size()); }

  // E[X_i] and E[(X - b)(X - b)^T] in closed form.
  std::vector<double> mean() const;
  SpdMatrix second_moment_about(const std::vector<double>& b) const;
};

// H(p|q) for multivariate Gaussians.
double kl_gaussian(const GaussianLaw& p, const GaussianLaw& q);

// Coincides with kl_gaussian of the log-scale parameters: relative entropy
// is invariant under the coordinatewise exp pushforward.
double kl_lognormal(const LognormalLaw& p, const LognormalLaw& q);

// H(p|q) for lognormal p against Gaussian q; finite closed form.
// (The reverse direction is +infinity: a Gaussian charges the negative
// orthant, which the lognormal cannot.)
double kl_lognormal_vs_gaussian(const LognormalLaw& p, const GaussianLaw& q);

double log_pdf(const GaussianLaw& law, const std::vector<double>& x);
double log_pdf(const LognormalLaw& law, const std::vector<double>& x);

// Relative entropy at time t between the marginal of a martingale
// Black-Scholes model with parameter gamma and the Brownian marginal,
// both started at the all-ones vector.
double kl_gbm_marginal_vs_bm(const Matrix& gamma, double t);

struct McEstimate {
  double value = 0.0;
  double stderr_of_mean = 0.0;
  std::int64_t paths = 0;
};

// Read-only view of a discrete path prefix: rows 0..len-1, each of size dim.
struct PrefixView {
  const double* data = nullptr;
  int len = 0;  // number of grid points available (k+1 for step k)
  int dim = 0;

  const double* row(int t) const { return data + static_cast<std::size_t>(t) * dim; }
  const double* last() const { return row(len - 1); }
};

// Conditional-KL evaluator for one grid step, closed over everything but the
// sampled prefix. First-class values so the chain rule treats Markov and
// non-Markov models uniformly.
using StepKlFn = std::function<double(const PrefixView&)>;

// Fills a full discrete path (rows 0..n_steps) for the given path index.
using PathSamplerFn = std::function<void(std::uint64_t path_index, double* out)>;

// Chain-rule Monte Carlo: draw prefixes under the first law, sum the exact
// per-step conditional divergences, and average per-path sums. The standard
// error comes from per-path sums, not per-step terms (steps within a path
// are dependent). Unbiased when the evaluators are exact conditional KLs.
McEstimate chain_rule_entropy(const std::vector<StepKlFn>& step_kls,
                              const PathSamplerFn& sample_path, int dim,
                              std::int64_t paths, std::uint64_t seed, int threads = 0);

}  // namespace srel

#endif
