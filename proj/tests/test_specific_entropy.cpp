#include <cmath>
#include <vector>

#include "doctest.h"
#include "srel/specific_entropy.hpp"

using namespace srel;

namespace {

Matrix mat1(double v) { return Matrix::identity(1).scaled(v); }

ModelPair gbm_vs_bm_pair(double gamma) {
  return ModelPair::make(ModelSpec::black_scholes(mat1(gamma)), ModelSpec::brownian(1, {1.0}));
}

}  // namespace

TEST_CASE("estimate_h on the scaled Brownian pair is exact at every level") {
  const ModelPair pair = ModelPair::make(ModelSpec::scaled_brownian(mat1(2.0)),
                                         ModelSpec::brownian(1));
  const ScalingEstimate est = estimate_h(pair, {4, 16, 64}, CurveMethod::analytic, 0, 0);
  const double expect = 0.80685281944005469;
  CHECK(std::abs(est.h_hat - expect) < 1e-12);
  CHECK(std::abs(est.h_last_level - expect) < 1e-12);
  CHECK(est.h_hat_stderr == 0.0);
  for (const auto& pt : est.curve.points)
    CHECK(std::abs(pt.value.finite_value() / pt.level - expect) < 1e-12);
}

TEST_CASE("estimate_h for a constant Gaussian martingale") {
  const ModelPair pair = ModelPair::make(
      ModelSpec::gaussian_martingale(PiecewiseConstMatrix::constant(SpdMatrix::identity(2).scaled(2.0))),
      ModelSpec::brownian(2));
  const ScalingEstimate est = estimate_h(pair, {2, 4, 8, 16}, CurveMethod::analytic, 0, 0);
  CHECK(est.h_hat == doctest::Approx(0.30685282).epsilon(1e-8));
  CHECK(est.h_hat == doctest::Approx(2.0 * f_1(2.0)).epsilon(1e-12));
}

TEST_CASE("estimate_h for GBM against Brownian converges within 1%") {
  const ScalingEstimate est =
      estimate_h(gbm_vs_bm_pair(1.0), {16, 32, 64, 128, 256}, CurveMethod::analytic, 0, 0);
  const double oracle = 0.5 * (std::exp(1.0) - 1.5);
  CHECK(std::abs(est.h_hat - oracle) / oracle < 0.01);
  CHECK(est.flag == ConvergenceFlag::converged);
  CHECK(est.fit.points_used == 3);
  CHECK(est.fit.stability > 0.0);
}

TEST_CASE("estimate_h validation") {
  const ModelPair pair = ModelPair::make(ModelSpec::scaled_brownian(mat1(2.0)),
                                         ModelSpec::brownian(1));
  CHECK_THROWS_AS(estimate_h(pair, {2, 4}, CurveMethod::analytic, 0, 0), InsufficientLevelsError);
  CHECK_THROWS_AS(estimate_h(pair, {2, 4, 6}, CurveMethod::analytic, 0, 0), InvalidArgumentError);
  // base-3 grids are allowed when configured
  const ScalingEstimate est =
      estimate_h(pair, {3, 9, 27}, CurveMethod::analytic, 0, 0, 0, 3);
  CHECK(est.h_hat == doctest::Approx(0.80685282).epsilon(1e-8));
}

TEST_CASE("sup identity for Gaussian martingales: value/n nondecreasing to the limit") {
  PiecewiseConstMatrix g;
  g.breakpoints = {0.0, 0.25, 0.5, 1.0};
  g.values = {SpdMatrix::from_rows({{2.0, 0.3}, {0.3, 1.0}}),
              SpdMatrix::from_rows({{1.0, -0.2}, {-0.2, 0.5}}), SpdMatrix::identity(2).scaled(0.7)};
  const ModelPair pair = ModelPair::make(ModelSpec::gaussian_martingale(g), ModelSpec::brownian(2));

  std::vector<int> levels = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  const EntropyCurve curve = entropy_curve(pair, levels, CurveMethod::analytic, 0, 0);
  double prev = -1.0;
  for (const auto& pt : curve.points) {
    const double vn = pt.value.finite_value() / pt.level;
    CHECK(vn >= prev - 1e-13);
    prev = vn;
  }
  const double limit = h_gaussian_martingale(g).value.finite_value();
  CHECK(std::abs(prev - limit) <= 1e-9);
  CHECK(prev <= limit + 1e-12);
}

TEST_CASE("gantert_bound_mc") {
  SUBCASE("Brownian motion: exactly zero, no sampling noise") {
    const GantertBound b = gantert_bound_mc(ModelSpec::brownian(3), 100, 1);
    CHECK(b.value.finite_value() == 0.0);
    CHECK(b.stderr_of_mean == 0.0);
  }

  SUBCASE("GBM quadrature estimate matches the closed-form time integral") {
    GantertOptions opts;
    opts.closed_form_black_scholes = false;
    opts.time_steps = 256;
    const GantertBound b = gantert_bound_mc(ModelSpec::black_scholes(mat1(1.0)), 100000, 17, opts);
    const double exact = 0.5 * (std::exp(1.0) - 1.5);
    CHECK(b.stderr_of_mean > 0.0);
    CHECK(std::abs(b.value.finite_value() - exact) <= 3.0 * b.stderr_of_mean + 2e-3);
  }

  SUBCASE("GBM closed form") {
    const GantertBound b = gantert_bound_mc(ModelSpec::black_scholes(mat1(1.0)), 100, 17);
    CHECK(b.value.finite_value() == doctest::Approx(0.60914091).epsilon(1e-8));
    CHECK(b.stderr_of_mean == 0.0);
  }

  SUBCASE("piecewise-constant Gaussian martingale: midpoint rule is exact") {
    PiecewiseConstMatrix g;
    g.breakpoints = {0.0, 0.25, 1.0};
    g.values = {SpdMatrix::diagonal({2.0, 1.3}), SpdMatrix::diagonal({0.5, 1.0})};
    const GantertBound b = gantert_bound_mc(ModelSpec::gaussian_martingale(g), 100, 3);
    const double exact = h_gaussian_martingale(g).value.finite_value();
    CHECK(b.value.finite_value() == doctest::Approx(exact).epsilon(1e-13));
    CHECK(b.stderr_of_mean == 0.0);
  }

  SUBCASE("singular scaled Brownian reports the Infinite bound") {
    Matrix sing(2, 2);
    sing(0, 0) = 1.0;
    const GantertBound b = gantert_bound_mc(ModelSpec::scaled_brownian(sing), 100, 3);
    CHECK(b.value.is_infinite());
  }
}

TEST_CASE("transform continuity: inflated bounds approach the base bound") {
  const ModelSpec base = ModelSpec::sde_martingale(VolRule::diag_sinusoid({1.0}, {0.5}));
  GantertOptions opts;
  opts.time_steps = 64;
  opts.euler_substeps = 4;
  const std::uint64_t seed = 99;  // shared seed couples the three estimates
  const std::int64_t paths = 20000;

  const double l_base = gantert_bound_mc(base, paths, seed, opts).value.finite_value();
  const double l_01 =
      gantert_bound_mc(transform(base, TransformKind::inflate, 0.1), paths, seed, opts)
          .value.finite_value();
  const double l_001 =
      gantert_bound_mc(transform(base, TransformKind::inflate, 0.01), paths, seed, opts)
          .value.finite_value();

  CHECK(std::abs(l_01 - l_base) > std::abs(l_001 - l_base));
  CHECK(std::abs(l_001 - l_base) < 0.02);
}

TEST_CASE("gap_report for GBM against Brownian") {
  const DivergenceReport rep =
      gap_report(gbm_vs_bm_pair(1.0), {16, 32, 64, 128, 256}, 1000, 7);
  CHECK(rep.h.method == HMethod::analytic);
  CHECK(rep.inequality == Verdict::pass);
  CHECK(rep.equality == Verdict::pass);
  REQUIRE(rep.oracle.has_value());
  CHECK(rep.oracle->value.finite_value() == doctest::Approx(0.60914091).epsilon(1e-8));

  const std::string json_text = report_to_json_string(rep);
  CHECK(json_text.find("\"inequality\": \"pass\"") != std::string::npos);
  CHECK(json_text.find("\"equality\": \"pass\"") != std::string::npos);
  CHECK(json_text.find("gantert_bound") != std::string::npos);
}

TEST_CASE("gap_report equality for a delayed-volatility model (MC both sides)") {
  const ModelSpec q =
      ModelSpec::delayed_volatility(4, DelayRule::frozen, VolRule::diag_sinusoid({1.0}, {0.5}));
  const ModelPair pair = ModelPair::make(q, ModelSpec::brownian(1));
  ReportOptions opts;
  opts.gantert.time_steps = 64;
  opts.gantert.euler_substeps = 4;
  const DivergenceReport rep = gap_report(pair, {8, 16, 32}, 20000, 41, opts);
  CHECK(rep.h.method == HMethod::chain_rule_mc);
  CHECK(rep.bound.stderr_of_mean > 0.0);
  CHECK(rep.inequality == Verdict::pass);
  CHECK(rep.equality == Verdict::pass);
}

TEST_CASE("gap_report inequality for a generic SDE model via the projection curve") {
  const ModelSpec q = ModelSpec::sde_martingale(VolRule::diag_sinusoid({1.0}, {0.5}));
  const ModelPair pair = ModelPair::make(q, ModelSpec::brownian(1));
  ReportOptions opts;
  opts.gantert.time_steps = 64;
  opts.gantert.euler_substeps = 4;
  opts.projection.inner_resamples = 32;
  opts.projection.euler_substeps = 4;
  const DivergenceReport rep = gap_report(pair, {4, 8, 16}, 4000, 3, opts);
  CHECK(rep.h.method == HMethod::projection_bound);
  CHECK(rep.inequality == Verdict::pass);
  CHECK(rep.equality == Verdict::not_applicable);
  CHECK(!rep.oracle.has_value());
}

TEST_CASE("gap_report for a Black-Scholes pair uses the covariance-ratio bound") {
  const ModelPair pair = ModelPair::make(ModelSpec::black_scholes(mat1(1.0)),
                                         ModelSpec::black_scholes(mat1(2.0)));
  const DivergenceReport rep = gap_report(pair, {2, 4, 8}, 1000, 11);
  CHECK(rep.bound.stderr_of_mean == 0.0);
  CHECK(rep.bound.value.finite_value() == doctest::Approx(0.31814718).epsilon(1e-8));
  CHECK(rep.inequality == Verdict::pass);
  CHECK(rep.equality == Verdict::pass);
  REQUIRE(rep.oracle.has_value());
  CHECK(rep.oracle->value.finite_value() == doctest::Approx(0.31814718).epsilon(1e-8));
}

TEST_CASE("tensorization of the scaling estimate") {
  SUBCASE("product of two iid GBM blocks doubles the one-block value") {
    const ModelPair block = gbm_vs_bm_pair(1.0);
    const ModelPair prod = ModelPair::make(
        ModelSpec::product({ModelSpec::black_scholes(mat1(1.0)), ModelSpec::black_scholes(mat1(1.0))}),
        ModelSpec::product({ModelSpec::brownian(1, {1.0}), ModelSpec::brownian(1, {1.0})}));
    const std::vector<int> levels = {16, 32, 64};
    const ScalingEstimate one = estimate_h(block, levels, CurveMethod::analytic, 0, 0);
    const ScalingEstimate two = estimate_h(prod, levels, CurveMethod::analytic, 0, 0);
    CHECK(two.h_hat == 2.0 * one.h_hat);
  }

  SUBCASE("correlated Q against an independent-coordinate P dominates the marginal sum") {
    Matrix gamma(2, 2);
    gamma(0, 0) = 1.0; gamma(0, 1) = 0.6; gamma(1, 0) = -0.3; gamma(1, 1) = 0.8;
    const ModelPair pair = ModelPair::make(ModelSpec::black_scholes(gamma),
                                           ModelSpec::brownian(2, {1.0, 1.0}));
    const std::vector<int> levels = {16, 32, 64, 128, 256};
    const ScalingEstimate joint = estimate_h(pair, levels, CurveMethod::analytic, 0, 0);

    const SpdMatrix gg = SpdMatrix::gram(gamma);
    double marginal_sum = 0.0;
    for (int i = 0; i < 2; ++i) {
      const ScalingEstimate mi = estimate_h(gbm_vs_bm_pair(std::sqrt(gg(i, i))), levels,
                                            CurveMethod::analytic, 0, 0);
      marginal_sum += mi.h_hat;
    }
    CHECK(joint.h_hat >= marginal_sum - 1e-9);
    // strict dominance here: the coupling term log(prod diag / det) is positive
    CHECK(joint.h_hat > marginal_sum + 1e-4);
  }
}

TEST_CASE("an infinite curve yields an infinite scaling estimate") {
  Matrix sing(2, 2);
  sing(0, 0) = 1.0; sing(1, 0) = 1.0;
  const ModelPair deg = ModelPair::make(ModelSpec::black_scholes(sing),
                                        ModelSpec::brownian(2, {1.0, 1.0}));
  const ScalingEstimate est = estimate_h(deg, {2, 4, 8}, CurveMethod::analytic, 0, 0);
  CHECK(est.infinite);
  CHECK(std::isinf(est.h_hat));

  // the gap report keeps working: both sides divergent, equality holds
  const DivergenceReport rep = gap_report(deg, {2, 4, 8}, 100, 1);
  CHECK(rep.inequality == Verdict::pass);
  CHECK(rep.equality == Verdict::pass);
  CHECK(rep.bound.value.is_infinite());
  const std::string text = report_to_json_string(rep);
  CHECK(text.find("\"h_hat\": \"inf\"") != std::string::npos);
}

TEST_CASE("scaling estimate h_hat respects the noise floor invariant") {
  const ModelSpec q =
      ModelSpec::delayed_volatility(4, DelayRule::frozen, VolRule::diag_sinusoid({1.0}, {0.5}));
  const ModelPair pair = ModelPair::make(q, ModelSpec::brownian(1));
  const ScalingEstimate est = estimate_h(pair, {8, 16, 32}, CurveMethod::mc, 5000, 9);
  double max_se = 0.0;
  for (const auto& pt : est.curve.points) max_se = std::max(max_se, pt.stderr_of_mean);
  CHECK(est.h_hat >= -3.0 * max_se);
  CHECK(est.h_hat > 0.0);
}
