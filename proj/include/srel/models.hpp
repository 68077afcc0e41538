#ifndef SREL_MODELS_HPP
#define SREL_MODELS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "srel/errors.hpp"
#include "srel/gaussian.hpp"
#include "srel/rng.hpp"
#include "srel/spdlinalg.hpp"

namespace srel {

// Piecewise-constant SPD-valued function on [0,1], the instantaneous
// covariance G(s) of a Gaussian martingale with a(t) = int_0^t G(s) ds.
struct PiecewiseConstMatrix {
  std::vector<double> breakpoints;  // t0 = 0 < ... < tm = 1
  std::vector<SpdMatrix> values;    // one per interval [t_i, t_{i+1})

  static PiecewiseConstMatrix constant(const SpdMatrix& g);

  int dim() const { return values.empty() ? 0 : values.front().dim(); }
  int pieces() const { return static_cast<int>(values.size()); }
  const SpdMatrix& value_at(double t) const;
  SpdMatrix integral(double a, double b) const;
  void validate() const;
};

// Sub-grid path history handed to volatility callbacks. Values exist at
// times j*dt for j = 0..count-1; queries floor to the latest point <= t.
struct PathHistory {
  const double* rows = nullptr;
  int count = 0;
  int dim = 0;
  double dt = 0.0;

  const double* at_time(double t) const {
    int idx = static_cast<int>(std::floor(t / dt + 1e-9));
    if (idx < 0) idx = 0;
    if (idx >= count) idx = count - 1;
    return rows + static_cast<std::size_t>(idx) * dim;
  }
  const double* last() const { return rows + static_cast<std::size_t>(count - 1) * dim; }
};

using VolCallback = std::function<Matrix(double t, const PathHistory&)>;

// Volatility rule: a serializable expression tree over a small catalog of
// pointwise rules plus the approximation transforms. `custom` wraps an
// arbitrary callback (usable in-process, not serializable). Callbacks must
// be pure and re-entrant; simulation runs them concurrently across paths.
struct VolRule {
  enum class Kind {
    constant,   // sigma = M
    diag_sin,   // sigma = diag(base_i + amp_i * sin(x_i))
    inflate,    // sigma = inner + eps*I
    cap,        // sigma = sqrt(cap_c(inner inner^T))
    mollify,    // sigma_t = n * int_{(t-1/n) v 0}^t inner_s ds (quadrature)
    shift,      // sigma_t = inner_{t - 1/N}, identity for t < 1/N
    custom,
  };

  Kind kind = Kind::constant;
  Matrix constant_matrix;
  std::vector<double> base, amp;
  double parameter = 0.0;  // eps for inflate, c for cap
  int window = 0;          // n for mollify, N for shift
  std::shared_ptr<const VolRule> inner;
  VolCallback custom_fn;

  static VolRule constant(const Matrix& m);
  static VolRule diag_sinusoid(std::vector<double> base, std::vector<double> amp);
  static VolRule custom(VolCallback fn, int dim);
  static VolRule wrap_inflate(VolRule base, double eps);
  static VolRule wrap_cap(VolRule base, double c);
  static VolRule wrap_mollify(VolRule base, int n);
  static VolRule wrap_shift(VolRule base, int delay);

  int dim_hint = 0;
  int dim() const;
  bool is_pointwise() const;  // depends on the path only through x at one time
  bool serializable() const;

  Matrix eval(double t, const PathHistory& h) const;
  Matrix eval_at_point(double t, const double* x, int l) const;
};

enum class Family {
  scaled_brownian,
  gaussian_martingale,
  black_scholes,
  delayed_volatility,
  sde_martingale,
  product,
};

enum class DelayRule {
  value_map,  // sigma_t = g(X_{(t-1/N) v 0})
  frozen,     // sigma constant on [j/N,(j+1)/N), equal to g(X_{(j-1)/N v 0})
  direct,     // sigma_t = g(t, path); the rule tree itself carries the delay
              // (e.g. a shift wrapper) -- produced by transforms
};

std::string family_name(Family f);

// Declarative martingale law on path space. Immutable after construction.
struct ModelSpec {
  Family family = Family::scaled_brownian;
  int dim = 0;
  std::vector<double> x0;

  Matrix a;                          // scaled_brownian: X = A B
  PiecewiseConstMatrix g;            // gaussian_martingale
  Matrix gamma;                      // black_scholes: dM = diag(M) Gamma dB
  int delay_n = 0;                   // delayed_volatility: N
  DelayRule delay_rule = DelayRule::frozen;
  VolRule vol;                       // delayed_volatility / sde_martingale
  std::vector<ModelSpec> components; // product blocks

  static ModelSpec brownian(int dim, std::vector<double> x0 = {});
  static ModelSpec scaled_brownian(const Matrix& a, std::vector<double> x0 = {});
  static ModelSpec gaussian_martingale(PiecewiseConstMatrix g, std::vector<double> x0 = {});
  // x0 defaults to the all-ones vector.
  static ModelSpec black_scholes(const Matrix& gamma, std::vector<double> x0 = {});
  static ModelSpec delayed_volatility(int delay_n, DelayRule rule, VolRule g,
                                      std::vector<double> x0 = {});
  static ModelSpec sde_martingale(VolRule vol, std::vector<double> x0 = {});
  static ModelSpec product(std::vector<ModelSpec> components);

  void validate() const;
  bool is_standard_brownian() const;  // scaled_brownian with A A^T == I

  // sigma(t, history) for the Euler families.
  Matrix volatility(double t, const PathHistory& h) const;
};

enum class Scheme { exact, euler };

struct SimOptions {
  int euler_substeps = 64;
  int threads = 0;
};

struct PathEnsemble {
  ModelSpec model;
  int level = 0;
  std::int64_t count = 0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::exact;
  int euler_substeps = 0;
  std::vector<double> data;  // count x (level+1) x dim, row-major

  const double* path(std::int64_t i) const {
    return data.data() + static_cast<std::size_t>(i) * (level + 1) * model.dim;
  }
  double value(std::int64_t p, int k, int coord) const {
    return path(p)[static_cast<std::size_t>(k) * model.dim + coord];
  }
};

// Prepared simulator: per-step factors are computed once, then paths are
// drawn independently with per-path substreams hash(seed, path_index).
class PathSimulator {
 public:
  PathSimulator(const ModelSpec& model, int level, int euler_substeps = 64);

  int dim() const { return model_.dim; }
  int level() const { return level_; }
  Scheme scheme() const { return scheme_; }
  int euler_substeps() const { return substeps_; }

  // Fills rows 0..level with the discrete path. Thread-safe.
  void sample(std::uint64_t seed, std::uint64_t path_index, double* out) const;

 private:
  void sample_with_rng(CounterRng& rng, double* out) const;
  friend class ProductSampler;

  ModelSpec model_;
  int level_;
  int substeps_;
  Scheme scheme_ = Scheme::exact;
  std::vector<Matrix> step_factors_;          // gaussian_martingale: S_k with S_k S_k^T = delta_k a
  std::vector<double> bs_row_sq_;             // black_scholes: (Gamma Gamma^T)_ii
  std::vector<std::unique_ptr<PathSimulator>> children_;
};

PathEnsemble simulate(const ModelSpec& model, int level, std::int64_t count,
                      std::uint64_t seed, const SimOptions& opts = {});

// One observation interval (all Euler sub-steps) for a callback-volatility
// model, appending to `history` (flat rows of size model.dim). Used by the
// nested conditional-covariance estimator, which branches and rewinds.
void euler_advance_interval(const ModelSpec& model, int level, int substeps,
                            std::vector<double>& history, CounterRng& rng);

// Conditional law of one grid increment (or ratio, for Black-Scholes).
struct StepLaw {
  enum class Kind { gaussian_increment, lognormal_ratio };
  Kind kind = Kind::gaussian_increment;
  std::vector<double> mean;  // increment mean / log-ratio mean
  SpdMatrix cov;             // increment covariance / log-ratio covariance

  GaussianLaw value_gaussian(const double* y) const;
  LognormalLaw value_lognormal(const double* y) const;
  // E[(X_k - y)(X_k - y)^T | prefix], y = prefix end.
  SpdMatrix increment_covariance(const double* y) const;
};

// True when conditional_increment_law is defined for every step at level n.
bool has_conditional_law(const ModelSpec& model, int n);
// True when the law parameters do not depend on the prefix.
bool conditional_law_is_prefix_free(const ModelSpec& model);

// k = 1..n; prefix must hold grid rows 0..k-1.
StepLaw conditional_increment_law(const ModelSpec& model, int k, int n, const PrefixView& prefix);

struct QvDensityTrack {
  std::vector<double> grid;       // n+1 time points
  std::vector<SpdMatrix> values;  // n entries, realized covariance per unit time
};

// Pathwise quadratic-variation density: per coarse interval, the sum of
// increment outer products over the m/n fine increments inside it, scaled
// by n. PSD by construction; summing values/n telescopes to the total
// realized covariance exactly.
QvDensityTrack realized_qv_density(const double* path, int fine_level, int dim, int window_n);

enum class TransformKind { inflate, cap, mollify, delay };

// The approximation transforms: inflate(eps) adds eps*I to the volatility,
// cap(c) caps the eigenvalues of sigma sigma^T, mollify(n) averages sigma
// over a 1/n window, delay(N) shifts sigma by 1/N (yielding a delayed-
// volatility model).
ModelSpec transform(const ModelSpec& model, TransformKind kind, double parameter);

}  // namespace srel

#endif
