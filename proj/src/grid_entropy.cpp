#include "srel/grid_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "srel/parallel.hpp"

namespace srel {

std::string route_name(PairRoute r) {
  switch (r) {
    case PairRoute::scaled_bm: return "scaledBmPair";
    case PairRoute::gaussian_vs_bm: return "gaussianVsBm";
    case PairRoute::gbm_vs_bm: return "gbmVsBm";
    case PairRoute::gbm_vs_gbm: return "gbmVsGbm";
    case PairRoute::product: return "product";
    case PairRoute::generic: return "generic";
  }
  return "?";
}

namespace {

bool all_ones(const std::vector<double>& v) {
  for (double x : v)
    if (x != 1.0) return false;
  return true;
}

bool gaussian_increment_family(const ModelSpec& m) {
  return m.family == Family::scaled_brownian || m.family == Family::gaussian_martingale;
}

PairRoute classify(const ModelSpec& q, const ModelSpec& p) {
  if (q.family == Family::scaled_brownian && p.family == Family::scaled_brownian)
    return PairRoute::scaled_bm;
  if (gaussian_increment_family(q) && gaussian_increment_family(p))
    return PairRoute::gaussian_vs_bm;
  if (q.family == Family::black_scholes && p.family == Family::black_scholes)
    return PairRoute::gbm_vs_gbm;
  if (q.family == Family::black_scholes && p.is_standard_brownian() && all_ones(q.x0))
    return PairRoute::gbm_vs_bm;
  if (q.family == Family::product && p.family == Family::product &&
      q.components.size() == p.components.size()) {
    for (std::size_t b = 0; b < q.components.size(); ++b) {
      const ModelSpec& qb = q.components[b];
      const ModelSpec& pb = p.components[b];
      if (qb.dim != pb.dim || qb.x0 != pb.x0) return PairRoute::generic;
      if (classify(qb, pb) == PairRoute::generic) return PairRoute::generic;
    }
    return PairRoute::product;
  }
  return PairRoute::generic;
}

// Increment covariance of one grid step for the Gaussian-increment families.
SpdMatrix per_step_cov(const ModelSpec& m, int k, int n) {
  if (m.family == Family::scaled_brownian) return SpdMatrix::gram(m.a).scaled(1.0 / n);
  return m.g.integral((k - 1.0) / n, static_cast<double>(k) / n);
}

// One-step laws of the log ratios of a Black-Scholes pair at level n.
void gbm_pair_step_laws(const ModelPair& pair, int n, GaussianLaw& lq, GaussianLaw& lp) {
  const SpdMatrix gg1 = SpdMatrix::gram(pair.q.gamma);
  const SpdMatrix gg2 = SpdMatrix::gram(pair.p.gamma);
  const int l = pair.q.dim;
  lq.mean.resize(static_cast<std::size_t>(l));
  lp.mean.resize(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) {
    lq.mean[static_cast<std::size_t>(i)] = -0.5 * gg1(i, i) / n;
    lp.mean[static_cast<std::size_t>(i)] = -0.5 * gg2(i, i) / n;
  }
  lq.cov = gg1.scaled(1.0 / n);
  lp.cov = gg2.scaled(1.0 / n);
}

}  // namespace

ModelPair ModelPair::make(ModelSpec q, ModelSpec p) {
  q.validate();
  p.validate();
  if (q.dim != p.dim) throw DimensionError("pair models must share the dimension");
  if (q.x0 != p.x0) throw InvalidArgumentError("pair models must start at the same point");
  ModelPair pr;
  pr.route = classify(q, p);
  pr.q = std::move(q);
  pr.p = std::move(p);
  return pr;
}

ExtReal restricted_entropy_analytic(const ModelPair& pair, int n) {
  if (n < 1) throw InvalidLevelError("level must be >= 1");
  switch (pair.route) {
    case PairRoute::scaled_bm:
    case PairRoute::gaussian_vs_bm: {
      double sum = 0.0;
      for (int k = 1; k <= n; ++k) {
        try {
          sum += f_l_pair(per_step_cov(pair.q, k, n), per_step_cov(pair.p, k, n));
        } catch (const SingularMatrixError&) {
          return ExtReal::infinity();
        }
      }
      return ExtReal::finite(sum);
    }
    case PairRoute::gbm_vs_bm: {
      // exact per-step sums: the first step is the marginal divergence at
      // t = 1/n; later steps integrate the conditional one over the prefix
      const int l = pair.q.dim;
      const SpdMatrix gg = SpdMatrix::gram(pair.q.gamma);
      double log_det;
      try {
        log_det = log_det_spd(gg);
      } catch (const SingularMatrixError&) {
        return ExtReal::infinity();
      }
      const double tr = gg.trace();
      std::vector<double> d(static_cast<std::size_t>(l)), e(static_cast<std::size_t>(l));
      for (int i = 0; i < l; ++i) {
        d[static_cast<std::size_t>(i)] = gg(i, i);
        e[static_cast<std::size_t>(i)] = std::expm1(gg(i, i) / n);
      }

      double first = -0.5 * log_det + 0.5 * tr / n - 0.5 * l;
      for (int i = 0; i < l; ++i) first += 0.5 * n * e[static_cast<std::size_t>(i)];
      double sum = first;
      for (int m = 2; m <= n; ++m) {
        double term = -0.5 * log_det + 0.5 * m * tr / n - 0.5 * l;
        for (int i = 0; i < l; ++i)
          term += 0.5 * n * std::exp((m - 1.0) / n * d[static_cast<std::size_t>(i)]) *
                  e[static_cast<std::size_t>(i)];
        sum += term;
      }
      return ExtReal::finite(sum);
    }
    case PairRoute::gbm_vs_gbm: {
      GaussianLaw lq, lp;
      gbm_pair_step_laws(pair, n, lq, lp);
      try {
        return ExtReal::finite(n * kl_gaussian(lq, lp));
      } catch (const SingularMatrixError&) {
        return ExtReal::infinity();
      }
    }
    case PairRoute::product: {
      ExtReal sum = ExtReal::finite(0.0);
      for (std::size_t b = 0; b < pair.q.components.size(); ++b)
        sum += restricted_entropy_analytic(
            ModelPair::make(pair.q.components[b], pair.p.components[b]), n);
      return sum;
    }
    case PairRoute::generic:
      break;
  }
  throw NoAnalyticRouteError("no analytic route for pair " + family_name(pair.q.family) + " / " +
                             family_name(pair.p.family));
}

namespace {

double step_kl_for_laws(const StepLaw& ql, const StepLaw& pl, const double* y) {
  using K = StepLaw::Kind;
  if (ql.kind == K::gaussian_increment && pl.kind == K::gaussian_increment)
    return kl_gaussian(GaussianLaw{ql.mean, ql.cov}, GaussianLaw{pl.mean, pl.cov});
  if (ql.kind == K::lognormal_ratio && pl.kind == K::lognormal_ratio)
    return kl_gaussian(GaussianLaw{ql.mean, ql.cov}, GaussianLaw{pl.mean, pl.cov});
  if (ql.kind == K::lognormal_ratio && pl.kind == K::gaussian_increment)
    return kl_lognormal_vs_gaussian(ql.value_lognormal(y), pl.value_gaussian(y));
  // a Gaussian conditional charges sets the lognormal conditional cannot
  return std::numeric_limits<double>::infinity();
}

// Builds the per-step conditional-KL evaluators for a pair with closed-form
// transitions on both sides. Prefix-independent combinations fold to
// constants.
std::vector<StepKlFn> make_step_evaluators(const ModelPair& pair, int n) {
  std::vector<StepKlFn> steps;
  steps.reserve(static_cast<std::size_t>(n));

  if (pair.q.family == Family::product && pair.p.family == Family::product &&
      pair.q.components.size() == pair.p.components.size()) {
    // independent blocks: per-step divergences add across sliced prefixes
    struct Block {
      ModelPair pair;
      int offset;
    };
    auto blocks = std::make_shared<std::vector<Block>>();
    int offset = 0;
    for (std::size_t b = 0; b < pair.q.components.size(); ++b) {
      blocks->push_back({ModelPair::make(pair.q.components[b], pair.p.components[b]), offset});
      offset += pair.q.components[b].dim;
    }
    std::vector<std::vector<StepKlFn>> block_steps;
    for (const auto& blk : *blocks) block_steps.push_back(make_step_evaluators(blk.pair, n));

    for (int k = 1; k <= n; ++k) {
      auto evals = std::make_shared<std::vector<StepKlFn>>();
      for (auto& bs : block_steps) evals->push_back(bs[static_cast<std::size_t>(k - 1)]);
      steps.push_back([blocks, evals](const PrefixView& prefix) {
        double sum = 0.0;
        std::vector<double> slice;
        for (std::size_t b = 0; b < blocks->size(); ++b) {
          const int bd = (*blocks)[b].pair.q.dim;
          const int off = (*blocks)[b].offset;
          slice.assign(static_cast<std::size_t>(prefix.len) * bd, 0.0);
          for (int t = 0; t < prefix.len; ++t)
            for (int i = 0; i < bd; ++i)
              slice[static_cast<std::size_t>(t) * bd + i] = prefix.row(t)[off + i];
          const PrefixView sub{slice.data(), prefix.len, bd};
          sum += (*evals)[b](sub);
        }
        return sum;
      });
    }
    return steps;
  }

  const bool prefix_free =
      conditional_law_is_prefix_free(pair.q) && conditional_law_is_prefix_free(pair.p);

  for (int k = 1; k <= n; ++k) {
    if (prefix_free) {
      const PrefixView start{pair.q.x0.data(), 1, pair.q.dim};
      const StepLaw ql = conditional_increment_law(pair.q, k, n, start);
      const StepLaw pl = conditional_increment_law(pair.p, k, n, start);
      if ((ql.kind == StepLaw::Kind::gaussian_increment) ==
          (pl.kind == StepLaw::Kind::gaussian_increment)) {
        // like-kinded laws: the prefix shift cancels inside the divergence
        const double value = step_kl_for_laws(ql, pl, pair.q.x0.data());
        steps.push_back([value](const PrefixView&) { return value; });
        continue;
      }
      // cross-kind (Black-Scholes against Brownian): the laws are fixed but
      // the divergence still depends on the prefix endpoint
      auto qlp = std::make_shared<const StepLaw>(ql);
      auto plp = std::make_shared<const StepLaw>(pl);
      steps.push_back([qlp, plp](const PrefixView& prefix) {
        return step_kl_for_laws(*qlp, *plp, prefix.last());
      });
      continue;
    }
    const ModelSpec& q = pair.q;
    const ModelSpec& p = pair.p;
    steps.push_back([&q, &p, k, n](const PrefixView& prefix) {
      const StepLaw ql = conditional_increment_law(q, k, n, prefix);
      const StepLaw pl = conditional_increment_law(p, k, n, prefix);
      return step_kl_for_laws(ql, pl, prefix.last());
    });
  }
  return steps;
}

McEstimate sanitize(McEstimate est) {
  if (!std::isfinite(est.stderr_of_mean)) est.stderr_of_mean = 0.0;
  return est;
}

}  // namespace

McEstimate restricted_entropy_mc(const ModelPair& pair, int n, std::int64_t paths,
                                 std::uint64_t seed, int threads) {
  if (n < 1) throw InvalidLevelError("level must be >= 1");
  if (!has_conditional_law(pair.q, n) || !has_conditional_law(pair.p, n))
    throw NoClosedFormError("both models must expose conditional increment laws at this level");
  if (paths < 2) throw InsufficientSamplesError("need at least 2 paths");

  const std::vector<StepKlFn> steps = make_step_evaluators(pair, n);
  const PathSimulator sim(pair.q, n);
  const PathSamplerFn sampler = [&sim, seed](std::uint64_t idx, double* out) {
    sim.sample(seed, idx, out);
  };
  return sanitize(chain_rule_entropy(steps, sampler, pair.q.dim, paths, seed, threads));
}

McEstimate gaussian_projection_bound(const ModelSpec& q, int n, std::int64_t paths,
                                     std::uint64_t seed, const ProjectionOptions& opts) {
  if (n < 1) throw InvalidLevelError("level must be >= 1");
  if (paths < 2) throw InsufficientSamplesError("need at least 2 paths");
  q.validate();
  const int l = q.dim;

  if (has_conditional_law(q, n)) {
    // exact conditional covariances
    std::vector<StepKlFn> steps;
    steps.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
      steps.push_back([&q, k, n](const PrefixView& prefix) {
        const StepLaw law = conditional_increment_law(q, k, n, prefix);
        return f_l(law.increment_covariance(prefix.last()).scaled(static_cast<double>(n)));
      });
    }
    const PathSimulator sim(q, n);
    const PathSamplerFn sampler = [&sim, seed](std::uint64_t idx, double* out) {
      sim.sample(seed, idx, out);
    };
    return sanitize(chain_rule_entropy(steps, sampler, q.dim, paths, seed, opts.threads));
  }

  // nested Monte Carlo: freeze the prefix, resample single observation steps
  const int r = opts.inner_resamples;
  if (r < 1) throw InvalidArgumentError("inner_resamples must be >= 1");
  const int substeps = opts.euler_substeps;

  MeanAccumulator acc(paths);
  parallel_chunks(paths, opts.threads, [&](std::int64_t chunk, std::int64_t b, std::int64_t e) {
    std::vector<double> hist;
    std::vector<double> dx(static_cast<std::size_t>(l));
    // one interval of slack so inner branches never reallocate
    const std::size_t cap = static_cast<std::size_t>(n * substeps + substeps + 1) * l;
    for (std::int64_t i = b; i < e; ++i) {
      CounterRng rng_main = CounterRng::substream(seed, static_cast<std::uint64_t>(i));
      hist.clear();
      hist.reserve(cap);
      hist.insert(hist.end(), q.x0.begin(), q.x0.end());
      double sum = 0.0;
      for (int k = 1; k <= n; ++k) {
        CounterRng rng_inner = CounterRng::substream(
            mix64(seed ^ 0x1BBE77AAULL), static_cast<std::uint64_t>(i) * n + (k - 1));
        const std::size_t len0 = hist.size();
        SpdMatrix cov = SpdMatrix::zero(l);
        for (int j = 0; j < r; ++j) {
          euler_advance_interval(q, n, substeps, hist, rng_inner);
          const double* endv = hist.data() + hist.size() - l;
          const double* y = hist.data() + len0 - l;
          for (int c = 0; c < l; ++c) dx[static_cast<std::size_t>(c)] = endv[c] - y[c];
          cov.add_outer(dx.data(), 1.0 / r);
          hist.resize(len0);
        }
        sum += f_l(cov.scaled(static_cast<double>(n)));
        euler_advance_interval(q, n, substeps, hist, rng_main);
      }
      acc.add(chunk, sum);
    }
  });
  return sanitize(McEstimate{acc.mean(), acc.stderr_of_mean(), paths});
}

std::int64_t mc_paths_for_level(std::int64_t base, int level) {
  if (level <= 64) return base;
  std::int64_t p = base;
  int n = level;
  while (n > 64) {
    p /= 2;
    n /= 2;
  }
  return std::max<std::int64_t>(p, 2);
}

EntropyCurve entropy_curve(const ModelPair& pair, const std::vector<int>& levels,
                           CurveMethod method, std::int64_t paths, std::uint64_t seed,
                           int threads) {
  if (levels.empty()) throw InvalidArgumentError("levels must be nonempty");
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    if (levels[i] >= levels[i + 1]) throw InvalidArgumentError("levels must be strictly increasing");

  EntropyCurve curve;
  for (int n : levels) {
    CurvePoint pt;
    pt.level = n;
    pt.method = method;
    if (method == CurveMethod::analytic) {
      pt.value = restricted_entropy_analytic(pair, n);
      pt.stderr_of_mean = 0.0;
    } else {
      // per-level seeds keep points statistically independent
      const std::uint64_t level_seed = mix64(seed ^ (0xC0FFEEULL + static_cast<std::uint64_t>(n)));
      const McEstimate est =
          restricted_entropy_mc(pair, n, mc_paths_for_level(paths, n), level_seed, threads);
      pt.value = ExtReal::finite(est.value);
      pt.stderr_of_mean = est.stderr_of_mean;
    }
    if (pt.value.is_finite() && pt.value.finite_value() < -3.0 * pt.stderr_of_mean)
      throw std::logic_error("restricted entropy came out significantly negative");
    curve.points.push_back(std::move(pt));
  }
  return curve;
}

std::string curve_to_csv(const EntropyCurve& curve) {
  std::string out = "level,value,stderr,method\n";
  char buf[96];
  for (const auto& pt : curve.points) {
    std::snprintf(buf, sizeof(buf), "%d,", pt.level);
    out += buf;
    out += pt.value.to_string();
    std::snprintf(buf, sizeof(buf), ",%.17g,%s\n", pt.stderr_of_mean,
                  pt.method == CurveMethod::analytic ? "analytic" : "mc");
    out += buf;
  }
  return out;
}

}  // namespace srel
