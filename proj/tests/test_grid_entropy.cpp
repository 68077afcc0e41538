#include <cmath>
#include <vector>

#include "doctest.h"
#include "srel/grid_entropy.hpp"
#include "srel/rng.hpp"

using namespace srel;

namespace {

ModelPair scaled_pair(double sigma, double eta, int l) {
  return ModelPair::make(ModelSpec::scaled_brownian(Matrix::identity(l).scaled(sigma)),
                         ModelSpec::scaled_brownian(Matrix::identity(l).scaled(eta)));
}

Matrix mat1(double v) { return Matrix::identity(1).scaled(v); }

}  // namespace

TEST_CASE("pair classification and validation") {
  CHECK(scaled_pair(2.0, 1.0, 1).route == PairRoute::scaled_bm);

  const ModelPair gm = ModelPair::make(
      ModelSpec::gaussian_martingale(PiecewiseConstMatrix::constant(SpdMatrix::identity(2).scaled(2.0))),
      ModelSpec::brownian(2));
  CHECK(gm.route == PairRoute::gaussian_vs_bm);

  const ModelPair gbm = ModelPair::make(ModelSpec::black_scholes(mat1(1.0)),
                                        ModelSpec::brownian(1, {1.0}));
  CHECK(gbm.route == PairRoute::gbm_vs_bm);

  const ModelPair gbm2 = ModelPair::make(ModelSpec::black_scholes(mat1(1.0)),
                                         ModelSpec::black_scholes(mat1(2.0)));
  CHECK(gbm2.route == PairRoute::gbm_vs_gbm);

  const ModelPair gen = ModelPair::make(
      ModelSpec::sde_martingale(VolRule::diag_sinusoid({1.0}, {0.5})), ModelSpec::brownian(1));
  CHECK(gen.route == PairRoute::generic);
  CHECK_THROWS_AS(restricted_entropy_analytic(gen, 4), NoAnalyticRouteError);

  CHECK_THROWS_AS(ModelPair::make(ModelSpec::brownian(1), ModelSpec::brownian(2)), DimensionError);
  CHECK_THROWS_AS(ModelPair::make(ModelSpec::brownian(1), ModelSpec::brownian(1, {1.0})),
                  InvalidArgumentError);
}

TEST_CASE("scaled Brownian pair: n times the one-step divergence") {
  const ModelPair pair = scaled_pair(2.0, 1.0, 1);
  for (int n : {1, 2, 4, 8, 64}) {
    const ExtReal v = restricted_entropy_analytic(pair, n);
    CHECK(v.is_finite());
    CHECK(v.finite_value() == doctest::Approx(n * 0.80685282).epsilon(1e-8));
  }
  // l = 3 triples the value
  CHECK(restricted_entropy_analytic(scaled_pair(2.0, 1.0, 3), 4).finite_value() ==
        doctest::Approx(3.0 * 4.0 * 0.80685281944005469).epsilon(1e-12));
}

TEST_CASE("Gaussian martingale against Brownian: partial sums of F") {
  const ModelPair pair = ModelPair::make(
      ModelSpec::gaussian_martingale(PiecewiseConstMatrix::constant(SpdMatrix::identity(1).scaled(2.0))),
      ModelSpec::brownian(1));
  for (int n : {1, 2, 8, 1024}) {
    CHECK(restricted_entropy_analytic(pair, n).finite_value() ==
          doctest::Approx(n * f_1(2.0)).epsilon(1e-11));
  }
}

TEST_CASE("restricted entropy against the joint-Gaussian chain rule oracle") {
  // independent-increment pairs: the full n*l-dimensional joint divergence
  // must equal the per-step sum
  PiecewiseConstMatrix g;
  g.breakpoints = {0.0, 0.5, 1.0};
  g.values = {SpdMatrix::from_rows({{2.0, 0.4}, {0.4, 1.0}}),
              SpdMatrix::from_rows({{0.5, -0.1}, {-0.1, 0.8}})};
  const ModelSpec q = ModelSpec::gaussian_martingale(g);
  const ModelSpec p = ModelSpec::brownian(2);
  const ModelPair pair = ModelPair::make(q, p);

  const int n = 4, l = 2;
  // joint covariance at the grid: Cov(X_s, X_t) = a(min(s,t))
  auto joint = [&](const ModelSpec& m) {
    Matrix c(n * l, n * l);
    for (int s = 1; s <= n; ++s)
      for (int t = 1; t <= n; ++t) {
        const double tm = std::min(s, t) / static_cast<double>(n);
        SpdMatrix a = m.family == Family::gaussian_martingale
                          ? m.g.integral(0.0, tm)
                          : SpdMatrix::gram(m.a).scaled(tm);
        for (int i = 0; i < l; ++i)
          for (int j = 0; j < l; ++j) c((s - 1) * l + i, (t - 1) * l + j) = a(i, j);
      }
    return GaussianLaw{std::vector<double>(static_cast<std::size_t>(n * l), 0.0), SpdMatrix(c)};
  };

  const double joint_kl = kl_gaussian(joint(q), joint(p));
  const double per_step = restricted_entropy_analytic(pair, n).finite_value();
  CHECK(per_step == doctest::Approx(joint_kl).epsilon(1e-9));
}

TEST_CASE("GBM against Brownian") {
  const ModelPair pair = ModelPair::make(ModelSpec::black_scholes(mat1(1.0)),
                                         ModelSpec::brownian(1, {1.0}));

  SUBCASE("n = 1 equals the marginal divergence at t = 1") {
    CHECK(restricted_entropy_analytic(pair, 1).finite_value() ==
          doctest::Approx(0.85914091).epsilon(1e-8));
  }

  SUBCASE("curve over n approaches the scaling limit from the closed form") {
    const double h = 0.5 * (std::exp(1.0) - 1.5);
    const double v256 = restricted_entropy_analytic(pair, 256).finite_value() / 256.0;
    CHECK(std::abs(v256 - h) / h < 0.02);
  }

  SUBCASE("Monte Carlo chain rule matches the analytic value at n = 4") {
    const McEstimate est = restricted_entropy_mc(pair, 4, 100000, 2024);
    const double exact = restricted_entropy_analytic(pair, 4).finite_value();
    CHECK(est.stderr_of_mean > 0.0);
    CHECK(std::abs(est.value - exact) <= 3.0 * est.stderr_of_mean);
  }

  SUBCASE("singular volatility yields the Infinite value") {
    Matrix sing(2, 2);
    sing(0, 0) = 1.0; sing(0, 1) = 0.0; sing(1, 0) = 1.0; sing(1, 1) = 0.0;
    const ModelPair deg = ModelPair::make(ModelSpec::black_scholes(sing),
                                          ModelSpec::brownian(2, {1.0, 1.0}));
    CHECK(restricted_entropy_analytic(deg, 4).is_infinite());
  }
}

TEST_CASE("GBM against GBM") {
  const ModelPair pair = ModelPair::make(ModelSpec::black_scholes(Matrix::identity(1)),
                                         ModelSpec::black_scholes(mat1(2.0)));

  SUBCASE("per-step structure: the n-step value is n times one step") {
    GaussianLaw lq{{-0.5 / 8}, SpdMatrix::diagonal({1.0 / 8})};
    GaussianLaw lp{{-2.0 / 8}, SpdMatrix::diagonal({4.0 / 8})};
    const double one_step = kl_gaussian(lq, lp);
    CHECK(restricted_entropy_analytic(pair, 8).finite_value() ==
          doctest::Approx(8.0 * one_step).epsilon(1e-12));
  }

  SUBCASE("MC equals analytic exactly (prefix-independent conditionals)") {
    const McEstimate est = restricted_entropy_mc(pair, 8, 1000, 7);
    CHECK(est.value == doctest::Approx(restricted_entropy_analytic(pair, 8).finite_value())
                           .epsilon(1e-12));
    CHECK(est.stderr_of_mean <= 1e-12);
  }

  SUBCASE("2d pair: MC equals analytic") {
    Matrix g1(2, 2), g2(2, 2);
    g1(0, 0) = 1.0; g1(0, 1) = 0.0; g1(1, 0) = 0.3; g1(1, 1) = 0.5;
    g2(0, 0) = 0.9; g2(0, 1) = -0.2; g2(1, 0) = 0.0; g2(1, 1) = 1.1;
    const ModelPair p2 = ModelPair::make(ModelSpec::black_scholes(g1), ModelSpec::black_scholes(g2));
    const McEstimate est = restricted_entropy_mc(p2, 8, 1000, 7);
    CHECK(est.value == doctest::Approx(restricted_entropy_analytic(p2, 8).finite_value())
                           .epsilon(1e-11));
  }
}

TEST_CASE("identical models give zero divergence") {
  const ModelPair bs = ModelPair::make(ModelSpec::black_scholes(mat1(0.8)),
                                       ModelSpec::black_scholes(mat1(0.8)));
  const McEstimate est = restricted_entropy_mc(bs, 4, 500, 3);
  CHECK(std::abs(est.value) <= 3.0 * est.stderr_of_mean + 1e-12);
  CHECK(restricted_entropy_analytic(bs, 4).finite_value() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("frozen delayed model: MC against hand-computed expectation") {
  // N = 2: the freeze times for every step at n = 4 are u = 0, so the
  // volatility is deterministic g(0) and the value is exact
  const ModelSpec q =
      ModelSpec::delayed_volatility(2, DelayRule::frozen, VolRule::diag_sinusoid({1.2}, {0.4}));
  const ModelSpec p = ModelSpec::brownian(1);
  const ModelPair pair = ModelPair::make(q, p);
  CHECK(pair.route == PairRoute::generic);

  const McEstimate est = restricted_entropy_mc(pair, 4, 2000, 11);
  const double s2 = 1.2 * 1.2;
  const double expected = 4.0 * f_1(s2);
  CHECK(est.value == doctest::Approx(expected).epsilon(1e-10));

  // N = 4 exposes genuine path dependence at level 8
  const ModelSpec q4 =
      ModelSpec::delayed_volatility(4, DelayRule::frozen, VolRule::diag_sinusoid({1.2}, {0.4}));
  const ModelPair pair4 = ModelPair::make(q4, p);
  const McEstimate est4 = restricted_entropy_mc(pair4, 8, 20000, 13);
  CHECK(est4.stderr_of_mean > 0.0);

  // level must be a multiple of N
  CHECK_THROWS_AS(restricted_entropy_mc(pair4, 6, 100, 1), NoClosedFormError);
}

TEST_CASE("gaussian projection bound") {
  SUBCASE("Brownian motion gives exactly zero") {
    const McEstimate est = gaussian_projection_bound(ModelSpec::brownian(2), 4, 100, 5);
    CHECK(est.value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(est.stderr_of_mean <= 1e-12);
  }

  SUBCASE("Gaussian martingale: equals the restricted entropy exactly") {
    PiecewiseConstMatrix g;
    g.breakpoints = {0.0, 0.25, 1.0};
    g.values = {SpdMatrix::diagonal({2.0}), SpdMatrix::diagonal({0.5})};
    const ModelSpec q = ModelSpec::gaussian_martingale(g);
    const McEstimate est = gaussian_projection_bound(q, 8, 100, 5);
    const double exact =
        restricted_entropy_analytic(ModelPair::make(q, ModelSpec::brownian(1)), 8).finite_value();
    CHECK(est.value == doctest::Approx(exact).epsilon(1e-12));
  }

  SUBCASE("GBM: bounded above by the restricted entropy") {
    const ModelSpec q = ModelSpec::black_scholes(mat1(1.0));
    const McEstimate est = gaussian_projection_bound(q, 8, 50000, 17);
    const double analytic =
        restricted_entropy_analytic(ModelPair::make(q, ModelSpec::brownian(1, {1.0})), 8)
            .finite_value();
    CHECK(est.value <= analytic + 3.0 * est.stderr_of_mean);
  }

  SUBCASE("nested resampling path for a generic SDE") {
    const ModelSpec q = ModelSpec::sde_martingale(VolRule::diag_sinusoid({1.0}, {0.5}));
    ProjectionOptions opts;
    opts.inner_resamples = 32;
    opts.euler_substeps = 4;
    const McEstimate est = gaussian_projection_bound(q, 4, 2000, 23, opts);
    CHECK(est.value >= 0.0);
    CHECK(est.stderr_of_mean > 0.0);
    // reproducible across worker counts
    ProjectionOptions opts1 = opts;
    opts1.threads = 1;
    ProjectionOptions opts8 = opts;
    opts8.threads = 8;
    const McEstimate a = gaussian_projection_bound(q, 4, 2000, 23, opts1);
    const McEstimate b = gaussian_projection_bound(q, 4, 2000, 23, opts8);
    CHECK(a.value == b.value);
    CHECK(a.value == est.value);
  }
}

TEST_CASE("entropy curves") {
  SUBCASE("scaled pair values are proportional to the level") {
    const EntropyCurve c =
        entropy_curve(scaled_pair(2.0, 1.0, 1), {2, 4, 8}, CurveMethod::analytic, 0, 0);
    REQUIRE(c.points.size() == 3);
    const double unit = c.points[0].value.finite_value() / 2.0;
    CHECK(c.points[1].value.finite_value() == doctest::Approx(4.0 * unit).epsilon(1e-13));
    CHECK(c.points[2].value.finite_value() == doctest::Approx(8.0 * unit).epsilon(1e-13));
  }

  SUBCASE("equal-diagonal GBM pair: value(n)/n is constant across levels") {
    Matrix g1(2, 2);
    // rows of unit norm: diag(G1 G1^T) matches the identity reference
    g1(0, 0) = 1.0; g1(0, 1) = 0.0; g1(1, 0) = 0.6; g1(1, 1) = 0.8;
    const ModelPair pair =
        ModelPair::make(ModelSpec::black_scholes(g1), ModelSpec::black_scholes(Matrix::identity(2)));
    const EntropyCurve c = entropy_curve(pair, {1, 2, 4}, CurveMethod::analytic, 0, 0);
    const double v1 = c.points[0].value.finite_value() / 1.0;
    CHECK(c.points[1].value.finite_value() / 2.0 == doctest::Approx(v1).epsilon(1e-12));
    CHECK(c.points[2].value.finite_value() / 4.0 == doctest::Approx(v1).epsilon(1e-12));
    CHECK(v1 > 0.0);
  }

  SUBCASE("analytic and MC curves agree for GBM against Brownian") {
    const ModelPair pair = ModelPair::make(ModelSpec::black_scholes(mat1(1.0)),
                                           ModelSpec::brownian(1, {1.0}));
    const EntropyCurve a = entropy_curve(pair, {2, 4}, CurveMethod::analytic, 0, 0);
    const EntropyCurve m = entropy_curve(pair, {2, 4}, CurveMethod::mc, 20000, 91);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(m.points[i].value.finite_value() - a.points[i].value.finite_value()) <=
            3.0 * m.points[i].stderr_of_mean);
    }
  }

  SUBCASE("level validation") {
    CHECK_THROWS_AS(entropy_curve(scaled_pair(2, 1, 1), {4, 2}, CurveMethod::analytic, 0, 0),
                    InvalidArgumentError);
    CHECK_THROWS_AS(entropy_curve(scaled_pair(2, 1, 1), {}, CurveMethod::analytic, 0, 0),
                    InvalidArgumentError);
  }

  SUBCASE("CSV rendering") {
    const EntropyCurve c =
        entropy_curve(scaled_pair(2.0, 1.0, 1), {2, 4}, CurveMethod::analytic, 0, 0);
    const std::string csv = curve_to_csv(c);
    CHECK(csv.find("level,value,stderr,method") == 0);
    CHECK(csv.find("analytic") != std::string::npos);
  }
}

TEST_CASE("restriction monotonicity of the grid entropies") {
  SUBCASE("analytic routes") {
    const ModelPair gbm = ModelPair::make(ModelSpec::black_scholes(mat1(1.0)),
                                          ModelSpec::brownian(1, {1.0}));
    double prev = 0.0;
    for (int n : {2, 4, 8, 16}) {
      const double v = restricted_entropy_analytic(gbm, n).finite_value();
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }

  SUBCASE("Monte Carlo route") {
    const ModelSpec q =
        ModelSpec::delayed_volatility(4, DelayRule::frozen, VolRule::diag_sinusoid({1.3}, {0.4}));
    const ModelPair pair = ModelPair::make(q, ModelSpec::brownian(1));
    const McEstimate coarse = restricted_entropy_mc(pair, 8, 20000, 5);
    const McEstimate fine = restricted_entropy_mc(pair, 16, 20000, 6);
    const double se = std::sqrt(coarse.stderr_of_mean * coarse.stderr_of_mean +
                                fine.stderr_of_mean * fine.stderr_of_mean);
    CHECK(coarse.value <= fine.value + 3.0 * se);
  }
}

TEST_CASE("divergent pairs render as inf in curves") {
  Matrix sing(2, 2);
  sing(0, 0) = 1.0; sing(1, 0) = 1.0;
  const ModelPair deg = ModelPair::make(ModelSpec::black_scholes(sing),
                                        ModelSpec::brownian(2, {1.0, 1.0}));
  const EntropyCurve c = entropy_curve(deg, {2, 4}, CurveMethod::analytic, 0, 0);
  CHECK(c.points[0].value.is_infinite());
  const std::string csv = curve_to_csv(c);
  CHECK(csv.find("2,inf,") != std::string::npos);
}

TEST_CASE("mollified volatility still simulates as a martingale") {
  const ModelSpec base = ModelSpec::sde_martingale(VolRule::diag_sinusoid({1.0}, {0.5}));
  const ModelSpec smooth = transform(base, TransformKind::mollify, 8.0);
  const PathEnsemble ens = simulate(smooth, 4, 20000, 13, SimOptions{8, 0});
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t p = 0; p < ens.count; ++p) {
    const double x = ens.value(p, 4, 0);
    sum += x;
    sumsq += x * x;
  }
  const double n = static_cast<double>(ens.count);
  const double mean = sum / n;
  const double se = std::sqrt(((sumsq - sum * sum / n) / (n - 1.0)) / n);
  CHECK(std::abs(mean) <= 4.0 * se);
}

TEST_CASE("product pairs add blockwise") {
  const ModelPair block = ModelPair::make(ModelSpec::black_scholes(mat1(1.0)),
                                          ModelSpec::brownian(1, {1.0}));
  const ModelPair prod = ModelPair::make(
      ModelSpec::product({ModelSpec::black_scholes(mat1(1.0)), ModelSpec::black_scholes(mat1(1.0))}),
      ModelSpec::product({ModelSpec::brownian(1, {1.0}), ModelSpec::brownian(1, {1.0})}));
  CHECK(prod.route == PairRoute::product);

  const int n = 4;
  const double one = restricted_entropy_analytic(block, n).finite_value();
  CHECK(restricted_entropy_analytic(prod, n).finite_value() == 2.0 * one);

  const McEstimate est = restricted_entropy_mc(prod, n, 20000, 77);
  CHECK(std::abs(est.value - 2.0 * one) <= 3.0 * est.stderr_of_mean);
}
