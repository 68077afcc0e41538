#include <cmath>
#include <vector>

#include "doctest.h"
#include "srel/gaussian.hpp"
#include "srel/rng.hpp"

using namespace srel;

namespace {

SpdMatrix random_spd(CounterRng& rng, int l, double jitter = 0.2) {
  Matrix a(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) a(i, j) = 2.0 * rng.next_u01() - 1.0;
  Matrix g = a * a.transpose();
  for (int i = 0; i < l; ++i) g(i, i) += jitter;
  return SpdMatrix(g);
}

std::vector<double> random_vec(CounterRng& rng, int l) {
  std::vector<double> v(static_cast<std::size_t>(l));
  for (auto& x : v) x = 2.0 * rng.next_u01() - 1.0;
  return v;
}

// sample from N(mean, cov) via the symmetric square root
std::vector<double> sample_gaussian(const GaussianLaw& law, CounterRng& rng) {
  const SpdMatrix root = spd_sqrt(law.cov);
  std::vector<double> z(law.mean.size());
  for (auto& x : z) x = rng.next_normal();
  std::vector<double> out = root.matrix().apply(z);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += law.mean[i];
  return out;
}

}  // namespace

TEST_CASE("kl_gaussian basics") {
  CounterRng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const int l = 1 + static_cast<int>(rng.next_u64() % 4);
    const GaussianLaw p{random_vec(rng, l), random_spd(rng, l)};
    CHECK(kl_gaussian(p, p) == doctest::Approx(0.0).epsilon(1e-10));
    const GaussianLaw q{random_vec(rng, l), random_spd(rng, l)};
    CHECK(kl_gaussian(p, q) >= 0.0);
  }

  // scalar shift: quadratic term only
  CHECK(kl_gaussian(GaussianLaw{{1.0}, SpdMatrix::identity(1)},
                    GaussianLaw{{0.0}, SpdMatrix::identity(1)}) == doctest::Approx(0.5).epsilon(1e-13));

  // mean-free case equals the covariance divergence
  CHECK(kl_gaussian(GaussianLaw{{0.0, 0.0}, SpdMatrix::identity(2).scaled(2.0)},
                    GaussianLaw{{0.0, 0.0}, SpdMatrix::identity(2)}) ==
        doctest::Approx(0.30685282).epsilon(1e-8));
}

TEST_CASE("mean-free kl_gaussian reduces to f_l_pair") {
  CounterRng rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    const int l = 1 + static_cast<int>(rng.next_u64() % 4);
    const std::vector<double> mu = random_vec(rng, l);
    const SpdMatrix s1 = random_spd(rng, l);
    const SpdMatrix s2 = random_spd(rng, l);
    const double kl = kl_gaussian(GaussianLaw{mu, s1}, GaussianLaw{mu, s2});
    CHECK(kl == doctest::Approx(f_l_pair(s1, s2)).epsilon(1e-11));
  }
}

TEST_CASE("kl_gaussian errors") {
  CHECK_THROWS_AS(kl_gaussian(GaussianLaw{{0.0}, SpdMatrix::identity(1)},
                              GaussianLaw{{0.0, 0.0}, SpdMatrix::identity(2)}),
                  DimensionError);
  CHECK_THROWS_AS(kl_gaussian(GaussianLaw{{0.0}, SpdMatrix::identity(1)},
                              GaussianLaw{{0.0}, SpdMatrix::diagonal({0.0})}),
                  SingularMatrixError);
}

TEST_CASE("kl_lognormal coincides with kl_gaussian of the log parameters") {
  CounterRng rng(0x51);
  for (int rep = 0; rep < 20; ++rep) {
    const int l = 1 + static_cast<int>(rng.next_u64() % 3);
    const LognormalLaw p{random_vec(rng, l), random_spd(rng, l)};
    const LognormalLaw q{random_vec(rng, l), random_spd(rng, l)};
    CHECK(kl_lognormal(p, q) ==
          kl_gaussian(GaussianLaw{p.log_mean, p.log_cov}, GaussianLaw{q.log_mean, q.log_cov}));
    CHECK(kl_lognormal(p, p) == doctest::Approx(0.0).epsilon(1e-10));
  }
  CHECK(kl_lognormal(LognormalLaw{{0.0}, SpdMatrix::identity(1)},
                     LognormalLaw{{1.0}, SpdMatrix::identity(1)}) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("pushforward invariance: sampled density ratios match the Gaussian value") {
  // exp is strictly monotone coordinatewise, so the lognormal density ratio
  // evaluated on mapped samples must average to the Gaussian divergence
  CounterRng rng(0x99);
  for (int l = 1; l <= 2; ++l) {
    const GaussianLaw p{random_vec(rng, l), random_spd(rng, l, 0.4)};
    const GaussianLaw q{random_vec(rng, l), random_spd(rng, l, 0.4)};
    const LognormalLaw lp{p.mean, p.cov};
    const LognormalLaw lq{q.mean, q.cov};

    const int samples = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
      const std::vector<double> z = sample_gaussian(p, rng);
      std::vector<double> ez(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) ez[i] = std::exp(z[i]);
      const double r = log_pdf(lp, ez) - log_pdf(lq, ez);
      sum += r;
      sumsq += r * r;
    }
    const double mean = sum / samples;
    const double sd = std::sqrt((sumsq - sum * sum / samples) / (samples - 1.0));
    const double se = sd / std::sqrt(static_cast<double>(samples));
    CHECK(std::abs(mean - kl_gaussian(p, q)) <= 3.0 * se);
  }
}

TEST_CASE("restriction monotonicity: marginal KL <= joint KL") {
  CounterRng rng(0xAB);
  for (int rep = 0; rep < 20; ++rep) {
    const int lx = 1 + static_cast<int>(rng.next_u64() % 2);
    const int ly = 1 + static_cast<int>(rng.next_u64() % 2);
    const int l = lx + ly;
    const GaussianLaw p{random_vec(rng, l), random_spd(rng, l, 0.3)};
    const GaussianLaw q{random_vec(rng, l), random_spd(rng, l, 0.3)};

    auto marginal = [&](const GaussianLaw& law) {
      std::vector<double> m(law.mean.begin(), law.mean.begin() + lx);
      Matrix c(lx, lx);
      for (int i = 0; i < lx; ++i)
        for (int j = 0; j < lx; ++j) c(i, j) = law.cov(i, j);
      return GaussianLaw{m, SpdMatrix(c)};
    };
    CHECK(kl_gaussian(marginal(p), marginal(q)) <= kl_gaussian(p, q) + 1e-10);
  }
}

TEST_CASE("GBM marginal against the Brownian marginal") {
  Matrix gamma(1, 1);
  gamma(0, 0) = 1.0;

  // 0.5 * (0 + 1 - 1 + (e - 1))
  CHECK(kl_gbm_marginal_vs_bm(gamma, 1.0) == doctest::Approx(0.85914091).epsilon(1e-8));
  CHECK(kl_gbm_marginal_vs_bm(gamma, 1.0) == doctest::Approx(0.5 * std::expm1(1.0)).epsilon(1e-13));

  // t -> 0 limit is F_l(Gamma Gamma^T)
  Matrix g2(2, 2);
  g2(0, 0) = 1.3; g2(0, 1) = 0.2; g2(1, 0) = -0.4; g2(1, 1) = 0.8;
  const double limit = f_l(SpdMatrix::gram(g2));
  CHECK(std::abs(kl_gbm_marginal_vs_bm(g2, 1e-6) - limit) < 1e-4);

  CHECK_THROWS_AS(kl_gbm_marginal_vs_bm(gamma, 0.0), InvalidArgumentError);
  Matrix sing(2, 2);
  sing(0, 0) = 1.0; sing(0, 1) = 1.0; sing(1, 0) = 1.0; sing(1, 1) = 1.0;
  CHECK_THROWS_AS(kl_gbm_marginal_vs_bm(sing, 1.0), SingularMatrixError);
}

TEST_CASE("GBM marginal formula agrees with a Monte Carlo density-ratio estimate") {
  // M_1 = exp(B_1 - 1/2) started at 1; Brownian marginal N(1, 1)
  const LognormalLaw m1{{-0.5}, SpdMatrix::identity(1)};
  const GaussianLaw b1{{1.0}, SpdMatrix::identity(1)};

  CounterRng rng(0x600D);
  const int samples = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double z = -0.5 + rng.next_normal();
    const std::vector<double> x{std::exp(z)};
    const double r = log_pdf(m1, x) - log_pdf(b1, x);
    sum += r;
    sumsq += r * r;
  }
  const double mean = sum / samples;
  const double sd = std::sqrt((sumsq - sum * sum / samples) / (samples - 1.0));
  const double se = sd / std::sqrt(static_cast<double>(samples));

  Matrix gamma(1, 1);
  gamma(0, 0) = 1.0;
  CHECK(std::abs(mean - kl_gbm_marginal_vs_bm(gamma, 1.0)) <= 3.0 * se);
}

TEST_CASE("lognormal against Gaussian cross divergence") {
  // against its own Gaussian pushforward target the value is finite and
  // sampling the log ratio reproduces it
  const LognormalLaw p{{-0.5}, SpdMatrix::diagonal({0.25})};
  const GaussianLaw q{{1.0}, SpdMatrix::diagonal({0.5})};
  const double kl = kl_lognormal_vs_gaussian(p, q);
  CHECK(kl >= 0.0);

  CounterRng rng(0xF00);
  const int samples = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double z = -0.5 + 0.5 * rng.next_normal();
    const std::vector<double> x{std::exp(z)};
    const double r = log_pdf(p, x) - log_pdf(q, x);
    sum += r;
    sumsq += r * r;
  }
  const double mean = sum / samples;
  const double sd = std::sqrt((sumsq - sum * sum / samples) / (samples - 1.0));
  const double se = sd / std::sqrt(static_cast<double>(samples));
  CHECK(std::abs(mean - kl) <= 3.0 * se);
}

TEST_CASE("chain_rule_entropy") {
  const int dim = 1;
  auto sampler = [](std::uint64_t idx, double* out) {
    CounterRng rng = CounterRng::substream(42, idx);
    out[0] = 0.0;
    out[1] = rng.next_normal();
    out[2] = out[1] + rng.next_normal();
  };

  SUBCASE("constant-zero evaluators give (0, 0)") {
    std::vector<StepKlFn> steps(2, [](const PrefixView&) { return 0.0; });
    const McEstimate est = chain_rule_entropy(steps, sampler, dim, 1000, 42);
    CHECK(est.value == 0.0);
    CHECK(est.stderr_of_mean == 0.0);
  }

  SUBCASE("independent steps with known divergences add up") {
    const double a = 0.31, b = 0.12;
    std::vector<StepKlFn> steps{[a](const PrefixView&) { return a; },
                                [b](const PrefixView&) { return b; }};
    const McEstimate est = chain_rule_entropy(steps, sampler, dim, 1000, 42);
    CHECK(est.value == doctest::Approx(a + b).epsilon(1e-13));
    CHECK(est.stderr_of_mean <= 1e-13);
  }

  SUBCASE("too few paths") {
    std::vector<StepKlFn> steps(1, [](const PrefixView&) { return 0.0; });
    CHECK_THROWS_AS(chain_rule_entropy(steps, sampler, dim, 1, 42), InsufficientSamplesError);
  }

  SUBCASE("parallel reduction is independent of the worker count") {
    std::vector<StepKlFn> steps{[](const PrefixView& p) { return p.last()[0] * p.last()[0]; },
                                [](const PrefixView& p) { return std::abs(p.last()[0]); }};
    const McEstimate a1 = chain_rule_entropy(steps, sampler, dim, 5000, 42, 1);
    const McEstimate a8 = chain_rule_entropy(steps, sampler, dim, 5000, 42, 8);
    CHECK(a1.value == a8.value);
    CHECK(a1.stderr_of_mean == a8.stderr_of_mean);
  }
}
