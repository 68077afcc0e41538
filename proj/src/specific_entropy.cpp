#include "srel/specific_entropy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "json.hpp"
#include "srel/model_json.hpp"
#include "srel/parallel.hpp"

namespace srel {

std::string convergence_flag_name(ConvergenceFlag f) {
  switch (f) {
    case ConvergenceFlag::converged: return "converged";
    case ConvergenceFlag::non_monotone_tail: return "nonMonotoneTail";
    case ConvergenceFlag::insufficient_levels: return "insufficientLevels";
  }
  return "?";
}

std::string h_method_name(HMethod m) {
  switch (m) {
    case HMethod::analytic: return "analytic";
    case HMethod::chain_rule_mc: return "chainRuleMc";
    case HMethod::projection_bound: return "projectionBound";
  }
  return "?";
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "notApplicable";
  }
  return "?";
}

namespace {

bool is_power_of(int n, int base) {
  if (n < 1) return false;
  int v = 1;
  while (v < n) {
    if (v > n / base + 1 && static_cast<long long>(v) * base > n) return false;
    v *= base;
  }
  return v == n;
}

struct FitInput {
  std::vector<double> x, y, s;  // 1/n, value/n, stderr/n
};

// weighted least squares of y ~ intercept + slope * x
void solve_affine(const FitInput& in, std::size_t from, AffineFit& fit) {
  const std::size_t k = in.x.size() - from;
  bool all_exact = true;
  for (std::size_t i = from; i < in.x.size(); ++i)
    if (in.s[i] > 0.0) all_exact = false;

  double sw = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = from; i < in.x.size(); ++i) {
    double w = 1.0;
    if (!all_exact) {
      const double floor_s = 1e-15 * (1.0 + std::abs(in.y[i]));
      const double si = std::max(in.s[i], floor_s);
      w = 1.0 / (si * si);
    }
    sw += w;
    sx += w * in.x[i];
    sxx += w * in.x[i] * in.x[i];
    sy += w * in.y[i];
    sxy += w * in.x[i] * in.y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (k == 1 || det == 0.0) {
    fit.intercept = in.y.back();
    fit.slope = 0.0;
    fit.intercept_stderr = in.s.back();
  } else {
    fit.intercept = (sxx * sy - sx * sxy) / det;
    fit.slope = (sw * sxy - sx * sy) / det;
    fit.intercept_stderr = all_exact ? 0.0 : std::sqrt(std::max(sxx / det, 0.0));
  }
  fit.points_used = static_cast<int>(k);

  double rss = 0.0;
  for (std::size_t i = from; i < in.x.size(); ++i) {
    const double r = in.y[i] - fit.intercept - fit.slope * in.x[i];
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / static_cast<double>(k));
}

}  // namespace

ScalingEstimate estimate_h_from_curve(const EntropyCurve& curve, HMethod method, int base) {
  const std::size_t levels = curve.points.size();
  if (levels < 3) throw InsufficientLevelsError("need at least 3 levels to extrapolate");
  if (base < 2) throw InvalidArgumentError("level base must be >= 2");
  for (const auto& pt : curve.points)
    if (!is_power_of(pt.level, base))
      throw InvalidArgumentError("levels must be powers of the configured base");

  ScalingEstimate est;
  est.method = method;
  est.curve = curve;

  for (const auto& pt : curve.points) {
    if (pt.value.is_infinite()) {
      est.infinite = true;
      est.h_hat = std::numeric_limits<double>::infinity();
      est.h_last_level = std::numeric_limits<double>::infinity();
      return est;
    }
  }

  FitInput in;
  for (const auto& pt : curve.points) {
    in.x.push_back(1.0 / pt.level);
    in.y.push_back(pt.value.finite_value() / pt.level);
    in.s.push_back(pt.stderr_of_mean / pt.level);
  }

  const std::size_t fit_points = (levels + 1) / 2;  // finest ceil(half)
  const std::size_t from = levels - fit_points;
  solve_affine(in, from, est.fit);

  if (fit_points >= 3) {
    AffineFit refit;
    solve_affine(in, from + 1, refit);
    est.fit.stability = std::abs(est.fit.intercept - refit.intercept);
  }

  est.h_hat = est.fit.intercept;
  est.h_hat_stderr = est.fit.intercept_stderr;
  est.h_last_level = in.y.back();
  est.h_last_level_stderr = in.s.back();

  if (fit_points < 3) {
    est.flag = ConvergenceFlag::insufficient_levels;
  } else {
    est.flag = ConvergenceFlag::converged;
    for (std::size_t i = from; i + 2 < levels; ++i) {
      const double d1 = in.y[i + 1] - in.y[i];
      const double d2 = in.y[i + 2] - in.y[i + 1];
      const double n1 = 3.0 * std::hypot(in.s[i + 1], in.s[i]) + 1e-13;
      const double n2 = 3.0 * std::hypot(in.s[i + 2], in.s[i + 1]) + 1e-13;
      if (d1 * d2 < 0.0 && std::abs(d1) > n1 && std::abs(d2) > n2) {
        est.flag = ConvergenceFlag::non_monotone_tail;
        break;
      }
    }
  }
  return est;
}

ScalingEstimate estimate_h(const ModelPair& pair, const std::vector<int>& levels,
                           CurveMethod method, std::int64_t paths, std::uint64_t seed,
                           int threads, int base) {
  if (levels.size() < 3) throw InsufficientLevelsError("need at least 3 levels to extrapolate");
  const EntropyCurve curve = entropy_curve(pair, levels, method, paths, seed, threads);
  return estimate_h_from_curve(
      curve, method == CurveMethod::analytic ? HMethod::analytic : HMethod::chain_rule_mc, base);
}

namespace {

std::uint64_t salted(std::uint64_t seed, std::uint64_t salt) { return mix64(seed ^ salt); }

bool all_ones(const std::vector<double>& v) {
  for (double x : v)
    if (x != 1.0) return false;
  return true;
}

GantertBound deterministic_bound(ExtReal value, std::int64_t paths, int m, std::uint64_t seed) {
  GantertBound b;
  b.value = value;
  b.stderr_of_mean = 0.0;
  b.paths = paths;
  b.time_steps = m;
  b.seed = seed;
  return b;
}

// F(diag(y) GG diag(y)) without forming the matrix.
double f_l_bs(const double* y, const SpdMatrix& gg, double log_det_gg) {
  const int l = gg.dim();
  double tr = 0.0, logs = 0.0;
  for (int i = 0; i < l; ++i) {
    tr += y[i] * y[i] * gg(i, i);
    logs += std::log(y[i] * y[i]);
  }
  return 0.5 * (tr - l - logs - log_det_gg);
}

}  // namespace

GantertBound gantert_bound_mc(const ModelSpec& q, std::int64_t paths, std::uint64_t seed,
                              const GantertOptions& opts) {
  q.validate();
  const int m = opts.time_steps;
  if (m < 1) throw InvalidArgumentError("time_steps must be >= 1");
  if (paths < 1) throw InsufficientSamplesError("need at least 1 path");
  const int l = q.dim;

  switch (q.family) {
    case Family::scaled_brownian: {
      try {
        return deterministic_bound(ExtReal::finite(f_l(SpdMatrix::gram(q.a))), paths, m, seed);
      } catch (const SingularMatrixError&) {
        return deterministic_bound(ExtReal::infinity(), paths, m, seed);
      }
    }
    case Family::gaussian_martingale: {
      double sum = 0.0;
      try {
        for (int j = 1; j <= m; ++j) sum += f_l(q.g.value_at((j - 0.5) / m));
      } catch (const SingularMatrixError&) {
        return deterministic_bound(ExtReal::infinity(), paths, m, seed);
      }
      return deterministic_bound(ExtReal::finite(sum / m), paths, m, seed);
    }
    case Family::black_scholes: {
      const SpdMatrix gg = SpdMatrix::gram(q.gamma);
      double log_det;
      try {
        log_det = log_det_spd(gg);
      } catch (const SingularMatrixError&) {
        return deterministic_bound(ExtReal::infinity(), paths, m, seed);
      }
      if (opts.closed_form_black_scholes && all_ones(q.x0)) {
        // explicit antiderivative of t -> E[F(Sigma_t)]
        double v = -0.5 * l - 0.5 * log_det + 0.25 * gg.trace();
        for (int i = 0; i < l; ++i) v += 0.5 * std::expm1(gg(i, i));
        return deterministic_bound(ExtReal::finite(v), paths, m, seed);
      }
      if (paths < 2) throw InsufficientSamplesError("need at least 2 paths");
      // sample the path at the midpoints: one exact simulation at level 2m
      const PathSimulator sim(q, 2 * m);
      MeanAccumulator acc(paths);
      parallel_chunks(paths, opts.threads, [&](std::int64_t chunk, std::int64_t b, std::int64_t e) {
        std::vector<double> path(static_cast<std::size_t>(2 * m + 1) * l);
        for (std::int64_t i = b; i < e; ++i) {
          sim.sample(seed, static_cast<std::uint64_t>(i), path.data());
          double val = 0.0;
          for (int j = 1; j <= m; ++j)
            val += f_l_bs(path.data() + static_cast<std::size_t>(2 * j - 1) * l, gg, log_det);
          acc.add(chunk, val / m);
        }
      });
      GantertBound out;
      out.value = ExtReal::finite(acc.mean());
      out.stderr_of_mean = acc.stderr_of_mean();
      out.paths = paths;
      out.time_steps = m;
      out.seed = seed;
      return out;
    }
    case Family::delayed_volatility:
    case Family::sde_martingale: {
      if (paths < 2) throw InsufficientSamplesError("need at least 2 paths");
      const int substeps = opts.euler_substeps;
      if (substeps < 2 || substeps % 2 != 0)
        throw InvalidArgumentError("midpoint evaluation needs an even substep count >= 2");
      MeanAccumulator acc(paths);
      std::atomic<bool> infinite{false};
      parallel_chunks(paths, opts.threads, [&](std::int64_t chunk, std::int64_t b, std::int64_t e) {
        std::vector<double> hist;
        const double dt = 1.0 / (static_cast<double>(m) * substeps);
        for (std::int64_t i = b; i < e; ++i) {
          if (infinite.load()) return;
          CounterRng rng = CounterRng::substream(seed, static_cast<std::uint64_t>(i));
          hist.clear();
          hist.reserve(static_cast<std::size_t>(m * substeps + 1) * l);
          hist.insert(hist.end(), q.x0.begin(), q.x0.end());
          for (int k = 1; k <= m; ++k) euler_advance_interval(q, m, substeps, hist, rng);
          const PathHistory h{hist.data(), static_cast<int>(hist.size()) / l, l, dt};
          double val = 0.0;
          try {
            for (int j = 1; j <= m; ++j) {
              const double t_mid = (j - 0.5) / m;
              val += f_l(SpdMatrix::gram(q.volatility(t_mid, h)));
            }
          } catch (const SingularMatrixError&) {
            infinite.store(true);
            return;
          }
          acc.add(chunk, val / m);
        }
      });
      if (infinite.load()) return deterministic_bound(ExtReal::infinity(), paths, m, seed);
      GantertBound out;
      out.value = ExtReal::finite(acc.mean());
      out.stderr_of_mean = acc.stderr_of_mean();
      out.paths = paths;
      out.time_steps = m;
      out.seed = seed;
      return out;
    }
    case Family::product: {
      GantertBound out;
      out.value = ExtReal::finite(0.0);
      out.paths = paths;
      out.time_steps = m;
      out.seed = seed;
      double var = 0.0;
      for (std::size_t b = 0; b < q.components.size(); ++b) {
        const GantertBound blk =
            gantert_bound_mc(q.components[b], paths, salted(seed, 0xB10CULL + b), opts);
        out.value += blk.value;
        var += blk.stderr_of_mean * blk.stderr_of_mean;
      }
      out.stderr_of_mean = std::sqrt(var);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

std::optional<OracleValue> pair_oracle(const ModelPair& pair) {
  try {
    switch (pair.route) {
      case PairRoute::scaled_bm:
      case PairRoute::gaussian_vs_bm: {
        // per-step covariance ratio integrated over [0,1]
        auto cov_fn = [](const ModelSpec& md) {
          return md.family == Family::scaled_brownian
                     ? PiecewiseConstMatrix::constant(SpdMatrix::gram(md.a))
                     : md.g;
        };
        const PiecewiseConstMatrix gq = cov_fn(pair.q);
        const PiecewiseConstMatrix gp = cov_fn(pair.p);
        std::vector<double> cuts = gq.breakpoints;
        cuts.insert(cuts.end(), gp.breakpoints.begin(), gp.breakpoints.end());
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
          const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
          sum += (cuts[i + 1] - cuts[i]) * f_l_pair(gq.value_at(mid), gp.value_at(mid));
        }
        OracleValue v{ExtReal::finite(sum), pair.route == PairRoute::scaled_bm ? "scaledBm"
                                                                               : "gaussianPair"};
        return v;
      }
      case PairRoute::gbm_vs_bm:
        return h_gbm_vs_bm(pair.q.gamma);
      case PairRoute::gbm_vs_gbm:
        return h_gbm_vs_gbm(pair.q.gamma, pair.p.gamma);
      case PairRoute::product: {
        OracleValue out{ExtReal::finite(0.0), "productSum"};
        for (std::size_t b = 0; b < pair.q.components.size(); ++b) {
          const auto blk =
              pair_oracle(ModelPair::make(pair.q.components[b], pair.p.components[b]));
          if (!blk) return std::nullopt;
          out.value += blk->value;
        }
        return out;
      }
      case PairRoute::generic:
        return std::nullopt;
    }
  } catch (const SingularMatrixError&) {
    return OracleValue{ExtReal::infinity(), "singular"};
  }
  return std::nullopt;
}

// The model classes for which the lower bound is known to be tight:
// Gaussian martingales, Black-Scholes against Brownian or Black-Scholes,
// and delayed-volatility models.
bool equality_case(const ModelPair& pair) {
  if (pair.route == PairRoute::gbm_vs_gbm) return true;
  if (!pair.p.is_standard_brownian()) return false;
  switch (pair.q.family) {
    case Family::scaled_brownian:
    case Family::gaussian_martingale:
    case Family::black_scholes:
    case Family::delayed_volatility:
      return true;
    case Family::product: {
      for (const auto& c : pair.q.components)
        if (c.family == Family::sde_martingale || c.family == Family::product) return false;
      return true;
    }
    default:
      return false;
  }
}

}  // namespace

DivergenceReport gap_report(const ModelPair& pair, const std::vector<int>& levels,
                            std::int64_t paths, std::uint64_t seed, const ReportOptions& opts) {
  DivergenceReport rep;
  rep.pair = pair;
  rep.levels = levels;
  rep.paths = paths;
  rep.seed = seed;

  // scaling-limit side
  bool mc_capable = true;
  for (int n : levels)
    if (!has_conditional_law(pair.q, n) || !has_conditional_law(pair.p, n)) mc_capable = false;

  if (pair.has_analytic_route()) {
    rep.h = estimate_h(pair, levels, CurveMethod::analytic, 0, seed, opts.threads);
  } else if (mc_capable) {
    rep.h = estimate_h(pair, levels, CurveMethod::mc, paths, seed, opts.threads);
  } else if (pair.p.is_standard_brownian()) {
    // only computable route for generic SDE models: the Gaussian projection,
    // whose per-level values lower-bound the restricted entropies
    if (levels.size() < 3) throw InsufficientLevelsError("need at least 3 levels to extrapolate");
    EntropyCurve curve;
    for (int n : levels) {
      CurvePoint pt;
      pt.level = n;
      pt.method = CurveMethod::mc;
      ProjectionOptions popts = opts.projection;
      popts.threads = opts.threads;
      const McEstimate est = gaussian_projection_bound(
          pair.q, n, mc_paths_for_level(paths, n), salted(seed, 0x9B0FULL + static_cast<std::uint64_t>(n)), popts);
      pt.value = ExtReal::finite(est.value);
      pt.stderr_of_mean = est.stderr_of_mean;
      curve.points.push_back(pt);
    }
    rep.h = estimate_h_from_curve(curve, HMethod::projection_bound);
  } else {
    throw UnsupportedOperationError("no estimator for this pair: generic model against a "
                                    "non-Brownian reference");
  }

  // lower-bound side
  if (pair.p.is_standard_brownian()) {
    GantertOptions gopts = opts.gantert;
    gopts.threads = opts.threads;
    rep.bound = gantert_bound_mc(pair.q, paths, salted(seed, 0x6A17ULL), gopts);
  } else if (pair.route == PairRoute::gbm_vs_gbm) {
    // instantaneous covariance ratio is constant: the dt integral is exact
    try {
      rep.bound = GantertBound{
          ExtReal::finite(f_l_pair(SpdMatrix::gram(pair.q.gamma), SpdMatrix::gram(pair.p.gamma))),
          0.0, paths, opts.gantert.time_steps, seed};
    } catch (const SingularMatrixError&) {
      rep.bound = GantertBound{ExtReal::infinity(), 0.0, paths, opts.gantert.time_steps, seed};
    }
  } else {
    throw UnsupportedOperationError(
        "the lower-bound functional needs a Brownian reference (or a Black-Scholes pair)");
  }

  rep.oracle = pair_oracle(pair);

  // verdicts
  const double combined =
      std::hypot(rep.h.h_hat_stderr, rep.bound.stderr_of_mean);
  if (rep.h.infinite) {
    rep.inequality = Verdict::pass;
  } else if (rep.bound.value.is_infinite()) {
    rep.inequality = Verdict::fail;
  } else {
    rep.inequality = rep.h.h_hat >= rep.bound.value.finite_value() - 3.0 * combined - 1e-12
                         ? Verdict::pass
                         : Verdict::fail;
  }

  if (equality_case(pair)) {
    if (rep.h.infinite || rep.bound.value.is_infinite()) {
      rep.equality = (rep.h.infinite && rep.bound.value.is_infinite()) ? Verdict::pass : Verdict::fail;
    } else {
      const double tol = 3.0 * combined + rep.h.fit.uncertainty() + 1e-9;
      rep.equality = std::abs(rep.h.h_hat - rep.bound.value.finite_value()) <= tol ? Verdict::pass
                                                                                   : Verdict::fail;
    }
  }
  return rep;
}

std::string report_to_json_string(const DivergenceReport& rep) {
  using nlohmann::json;
  json j;
  j["pair"]["q"] = model_to_json(rep.pair.q);
  j["pair"]["p"] = model_to_json(rep.pair.p);
  j["pair"]["route"] = route_name(rep.pair.route);

  auto put_ext = [](json& obj, const char* key, const ExtReal& v) {
    if (v.is_infinite())
      obj[key] = "inf";
    else
      obj[key] = v.finite_value();
  };

  if (rep.h.infinite)
    j["h_hat"] = "inf";
  else
    j["h_hat"] = rep.h.h_hat;
  j["h_hat_stderr"] = rep.h.h_hat_stderr;
  if (rep.h.infinite)
    j["h_last_level"] = "inf";
  else
    j["h_last_level"] = rep.h.h_last_level;
  j["h_last_level_stderr"] = rep.h.h_last_level_stderr;
  j["h_method"] = h_method_name(rep.h.method);
  j["convergence_flag"] = convergence_flag_name(rep.h.flag);
  j["fit"] = {{"intercept", rep.h.fit.intercept},
              {"slope", rep.h.fit.slope},
              {"intercept_stderr", rep.h.fit.intercept_stderr},
              {"residual_rms", rep.h.fit.residual_rms},
              {"stability", rep.h.fit.stability},
              {"points_used", rep.h.fit.points_used}};

  put_ext(j, "gantert_bound", rep.bound.value);
  j["gantert_bound_stderr"] = rep.bound.stderr_of_mean;

  if (rep.oracle) {
    put_ext(j, "oracle", rep.oracle->value);
    j["oracle_formula"] = rep.oracle->formula_id;
    j["oracle_lower_bound_only"] = rep.oracle->lower_bound_only;
  } else {
    j["oracle"] = nullptr;
  }

  j["verdicts"]["inequality"] = verdict_name(rep.inequality);
  j["verdicts"]["equality"] = verdict_name(rep.equality);

  json curve = json::array();
  for (const auto& pt : rep.h.curve.points) {
    json row;
    row["level"] = pt.level;
    if (pt.value.is_infinite())
      row["value"] = "inf";
    else
      row["value"] = pt.value.finite_value();
    row["stderr"] = pt.stderr_of_mean;
    row["method"] = pt.method == CurveMethod::analytic ? "analytic" : "mc";
    curve.push_back(std::move(row));
  }
  j["curve"] = std::move(curve);

  j["config"] = {{"levels", rep.levels},
                 {"paths", rep.paths},
                 {"seed", rep.seed},
                 {"time_steps", rep.bound.time_steps}};
  return j.dump(2) + "\n";
}

}  // namespace srel
