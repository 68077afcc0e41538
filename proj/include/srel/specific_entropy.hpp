#ifndef SREL_SPECIFIC_ENTROPY_HPP
#define SREL_SPECIFIC_ENTROPY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srel/ext_real.hpp"
#include "srel/grid_entropy.hpp"
#include "srel/oracles.hpp"

namespace srel {

enum class ConvergenceFlag { converged, non_monotone_tail, insufficient_levels };
enum class HMethod { analytic, chain_rule_mc, projection_bound };

std::string convergence_flag_name(ConvergenceFlag f);
std::string h_method_name(HMethod m);

// Weighted affine fit of value/n against 1/n over the finest half of the
// curve. `stability` is the intercept shift when the coarsest fitted point
// is dropped -- a Richardson-style check on the extrapolation ansatz, which
// the closed-form families satisfy exactly but general models only
// heuristically.
struct AffineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_stderr = 0.0;
  double residual_rms = 0.0;
  double stability = 0.0;
  int points_used = 0;

  double uncertainty() const { return residual_rms + stability; }
};

struct ScalingEstimate {
  double h_hat = 0.0;
  double h_hat_stderr = 0.0;
  double h_last_level = 0.0;
  double h_last_level_stderr = 0.0;
  bool infinite = false;
  AffineFit fit;
  ConvergenceFlag flag = ConvergenceFlag::converged;
  HMethod method = HMethod::analytic;
  EntropyCurve curve;
};

// Validates that the levels are powers of `base` (>= 3 of them) and fits
// value/n ~ h + c/n; the intercept is the scaling-limit estimate.
ScalingEstimate estimate_h_from_curve(const EntropyCurve& curve, HMethod method, int base = 2);

ScalingEstimate estimate_h(const ModelPair& pair, const std::vector<int>& levels,
                           CurveMethod method, std::int64_t paths, std::uint64_t seed,
                           int threads = 0, int base = 2);

struct GantertBound {
  ExtReal value;
  double stderr_of_mean = 0.0;
  std::int64_t paths = 0;
  int time_steps = 0;
  std::uint64_t seed = 0;
};

struct GantertOptions {
  int time_steps = 256;            // midpoint-rule resolution of the dt integral
  bool closed_form_black_scholes = true;  // exact time integral instead of quadrature
  int euler_substeps = 8;
  int threads = 0;
};

// Monte Carlo estimate of E_Q[int_0^1 F_l(Sigma_t) dt], the quadratic-
// variation lower-bound functional. Deterministic (zero standard error)
// for models whose instantaneous covariance does not depend on the path.
GantertBound gantert_bound_mc(const ModelSpec& q, std::int64_t paths, std::uint64_t seed,
                              const GantertOptions& opts = {});

enum class Verdict { pass, fail, not_applicable };
std::string verdict_name(Verdict v);

struct DivergenceReport {
  ModelPair pair;
  ScalingEstimate h;
  GantertBound bound;
  std::optional<OracleValue> oracle;
  Verdict inequality = Verdict::not_applicable;
  Verdict equality = Verdict::not_applicable;
  // echo of the run configuration
  std::vector<int> levels;
  std::int64_t paths = 0;
  std::uint64_t seed = 0;
};

struct ReportOptions {
  GantertOptions gantert;
  ProjectionOptions projection;
  int threads = 0;
};

// Paired estimate of the scaling limit and the lower-bound functional,
// with the inequality verdict (and the equality verdict where the model
// class makes the bound tight).
DivergenceReport gap_report(const ModelPair& pair, const std::vector<int>& levels,
                            std::int64_t paths, std::uint64_t seed,
                            const ReportOptions& opts = {});

std::string report_to_json_string(const DivergenceReport& report);

}  // namespace srel

#endif
