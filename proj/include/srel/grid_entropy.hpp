#ifndef SREL_GRID_ENTROPY_HPP
#define SREL_GRID_ENTROPY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "srel/ext_real.hpp"
#include "srel/gaussian.hpp"
#include "srel/models.hpp"

namespace srel {

// Which closed-form route applies to a (Q, P) pair.
enum class PairRoute {
  scaled_bm,        // both scaled Brownian
  gaussian_vs_bm,   // Gaussian independent increments against same
  gbm_vs_bm,        // Black-Scholes against standard Brownian, start at ones
  gbm_vs_gbm,       // two Black-Scholes models, common start
  product,          // products with blockwise non-generic routes
  generic,
};

std::string route_name(PairRoute r);

struct ModelPair {
  ModelSpec q;
  ModelSpec p;
  PairRoute route = PairRoute::generic;

  // Validates equal dimensions and equal starting points, then classifies.
  static ModelPair make(ModelSpec q, ModelSpec p);

  bool has_analytic_route() const { return route != PairRoute::generic; }
};

// Exact H(Q|P) restricted to the n-point grid sigma-algebra, from the
// closed-form per-step sums. Singular per-step covariances yield the
// distinguished Infinite value rather than an error.
ExtReal restricted_entropy_analytic(const ModelPair& pair, int n);

// Chain-rule Monte Carlo: Q-prefixes, exact conditional KLs per step,
// averaged per-path sums. Unbiased for the restricted entropy.
McEstimate restricted_entropy_mc(const ModelPair& pair, int n, std::int64_t paths,
                                 std::uint64_t seed, int threads = 0);

struct ProjectionOptions {
  int inner_resamples = 64;  // nested one-step draws when no closed form exists
  int euler_substeps = 16;
  int threads = 0;
};

// E_Q[sum_k F_l(n E[dX dX^T | prefix])]: the explicitly computable term in
// the decomposition of H(Q|B) against the Gaussian measure matching Q's
// conditional increment covariances. A lower bound for H(Q|B) restricted
// to the grid. Exact conditional covariances are used whenever the model
// provides them; otherwise they are estimated by freezing the prefix and
// re-sampling single steps.
McEstimate gaussian_projection_bound(const ModelSpec& q, int n, std::int64_t paths,
                                     std::uint64_t seed, const ProjectionOptions& opts = {});

enum class CurveMethod { analytic, mc };

struct CurvePoint {
  int level = 0;
  ExtReal value;
  double stderr_of_mean = 0.0;
  CurveMethod method = CurveMethod::analytic;
};

struct EntropyCurve {
  std::vector<CurvePoint> points;
};

// Default path-count schedule: `base` paths up to level 64, halved for each
// further level doubling (per-path cost grows linearly in n).
std::int64_t mc_paths_for_level(std::int64_t base, int level);

// Evaluates the restricted entropy at each level. MC points use per-level
// seeds derived from `seed`, so points are statistically independent.
EntropyCurve entropy_curve(const ModelPair& pair, const std::vector<int>& levels,
                           CurveMethod method, std::int64_t paths, std::uint64_t seed,
                           int threads = 0);

// CSV with header level,value,stderr,method; 17 significant digits.
std::string curve_to_csv(const EntropyCurve& curve);

}  // namespace srel

#endif
