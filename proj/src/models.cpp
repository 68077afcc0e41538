#include "srel/models.hpp"

#include <algorithm>
#include <cmath>

#include "srel/parallel.hpp"

namespace srel {

// ---------------------------------------------------------------------------
// PiecewiseConstMatrix

PiecewiseConstMatrix PiecewiseConstMatrix::constant(const SpdMatrix& g) {
  PiecewiseConstMatrix p;
  p.breakpoints = {0.0, 1.0};
  p.values = {g};
  return p;
}

const SpdMatrix& PiecewiseConstMatrix::value_at(double t) const {
  // pieces are [t_i, t_{i+1}); the final piece also owns t = 1
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (t < breakpoints[i + 1]) return values[i];
  return values.back();
}

SpdMatrix PiecewiseConstMatrix::integral(double a, double b) const {
  SpdMatrix acc = SpdMatrix::zero(dim());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double lo = std::max(a, breakpoints[i]);
    const double hi = std::min(b, breakpoints[i + 1]);
    if (hi > lo) acc = acc + values[i].scaled(hi - lo);
  }
  return acc;
}

void PiecewiseConstMatrix::validate() const {
  if (values.empty()) throw InvalidArgumentError("piecewise matrix: no pieces");
  if (breakpoints.size() != values.size() + 1)
    throw InvalidArgumentError("piecewise matrix: breakpoints must be one longer than values");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw InvalidArgumentError("piecewise matrix: domain must be [0,1]");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw InvalidArgumentError("piecewise matrix: breakpoints must increase");
  const int l = dim();
  for (const auto& v : values) {
    if (v.dim() != l) throw DimensionError("piecewise matrix: inconsistent dimensions");
    const Eigensystem es = eigen_decompose(v);
    if (es.eigenvalues.back() < -1e-10 * (1.0 + es.eigenvalues.front()))
      throw InvalidArgumentError("piecewise matrix: value is not positive semidefinite");
  }
}

// ---------------------------------------------------------------------------
// VolRule

VolRule VolRule::constant(const Matrix& m) {
  VolRule r;
  r.kind = Kind::constant;
  r.constant_matrix = m;
  r.dim_hint = m.rows();
  return r;
}

VolRule VolRule::diag_sinusoid(std::vector<double> base, std::vector<double> amp) {
  if (base.size() != amp.size()) throw DimensionError("diag_sinusoid: base/amp size mismatch");
  VolRule r;
  r.kind = Kind::diag_sin;
  r.dim_hint = static_cast<int>(base.size());
  r.base = std::move(base);
  r.amp = std::move(amp);
  return r;
}

VolRule VolRule::custom(VolCallback fn, int dim) {
  VolRule r;
  r.kind = Kind::custom;
  r.custom_fn = std::move(fn);
  r.dim_hint = dim;
  return r;
}

VolRule VolRule::wrap_inflate(VolRule b, double eps) {
  if (!(eps > 0.0)) throw InvalidArgumentError("inflate needs eps > 0");
  VolRule r;
  r.kind = Kind::inflate;
  r.parameter = eps;
  r.dim_hint = b.dim();
  r.inner = std::make_shared<const VolRule>(std::move(b));
  return r;
}

VolRule VolRule::wrap_cap(VolRule b, double c) {
  if (!(c > 0.0)) throw InvalidArgumentError("cap needs c > 0");
  VolRule r;
  r.kind = Kind::cap;
  r.parameter = c;
  r.dim_hint = b.dim();
  r.inner = std::make_shared<const VolRule>(std::move(b));
  return r;
}

VolRule VolRule::wrap_mollify(VolRule b, int n) {
  if (n < 1) throw InvalidArgumentError("mollify needs n >= 1");
  VolRule r;
  r.kind = Kind::mollify;
  r.window = n;
  r.dim_hint = b.dim();
  r.inner = std::make_shared<const VolRule>(std::move(b));
  return r;
}

VolRule VolRule::wrap_shift(VolRule b, int delay) {
  if (delay < 1) throw InvalidArgumentError("shift needs N >= 1");
  VolRule r;
  r.kind = Kind::shift;
  r.window = delay;
  r.dim_hint = b.dim();
  r.inner = std::make_shared<const VolRule>(std::move(b));
  return r;
}

int VolRule::dim() const { return dim_hint; }

bool VolRule::is_pointwise() const {
  switch (kind) {
    case Kind::constant:
    case Kind::diag_sin:
      return true;
    case Kind::inflate:
    case Kind::cap:
      return inner->is_pointwise();
    default:
      return false;
  }
}

bool VolRule::serializable() const {
  switch (kind) {
    case Kind::constant:
    case Kind::diag_sin:
      return true;
    case Kind::custom:
      return false;
    default:
      return inner->serializable();
  }
}

Matrix VolRule::eval_at_point(double t, const double* x, int l) const {
  switch (kind) {
    case Kind::constant:
      return constant_matrix;
    case Kind::diag_sin: {
      Matrix m(l, l);
      for (int i = 0; i < l; ++i)
        m(i, i) = base[static_cast<std::size_t>(i)] + amp[static_cast<std::size_t>(i)] * std::sin(x[i]);
      return m;
    }
    case Kind::inflate: {
      Matrix m = inner->eval_at_point(t, x, l);
      for (int i = 0; i < l; ++i) m(i, i) += parameter;
      return m;
    }
    case Kind::cap: {
      const Matrix s = inner->eval_at_point(t, x, l);
      return spd_sqrt(spectral_transform(SpdMatrix::gram(s), SpectralKind::cap, parameter)).matrix();
    }
    default:
      throw UnsupportedTransformError("volatility rule is not pointwise");
  }
}

Matrix VolRule::eval(double t, const PathHistory& h) const {
  switch (kind) {
    case Kind::constant:
      return constant_matrix;
    case Kind::diag_sin:
      return eval_at_point(t, h.at_time(t), h.dim);
    case Kind::inflate: {
      Matrix m = inner->eval(t, h);
      for (int i = 0; i < m.rows(); ++i) m(i, i) += parameter;
      return m;
    }
    case Kind::cap: {
      const Matrix s = inner->eval(t, h);
      return spd_sqrt(spectral_transform(SpdMatrix::gram(s), SpectralKind::cap, parameter)).matrix();
    }
    case Kind::mollify: {
      // midpoint quadrature of the running average over [(t-1/n) v 0, t]
      const double lo = std::max(0.0, t - 1.0 / window);
      const double len = t - lo;
      const int points = 16;
      Matrix acc(dim_hint, dim_hint);
      if (len <= 0.0) return inner->eval(t, h);
      for (int j = 0; j < points; ++j) {
        const double s = lo + (j + 0.5) * len / points;
        acc = acc + inner->eval(s, h);
      }
      return acc.scaled(1.0 / points);
    }
    case Kind::shift: {
      const double shifted = t - 1.0 / window;
      if (shifted < 0.0) return Matrix::identity(dim_hint);
      return inner->eval(shifted, h);
    }
    case Kind::custom:
      return custom_fn(t, h);
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// ModelSpec

std::string family_name(Family f) {
  switch (f) {
    case Family::scaled_brownian: return "scaledBrownian";
    case Family::gaussian_martingale: return "gaussianMartingale";
    case Family::black_scholes: return "blackScholes";
    case Family::delayed_volatility: return "delayedVolatility";
    case Family::sde_martingale: return "sdeMartingale";
    case Family::product: return "product";
  }
  return "?";
}

namespace {

std::vector<double> default_x0(std::vector<double> x0, int dim, double fill) {
  if (x0.empty()) x0.assign(static_cast<std::size_t>(dim), fill);
  return x0;
}

}  // namespace

ModelSpec ModelSpec::brownian(int dim, std::vector<double> x0) {
  return scaled_brownian(Matrix::identity(dim), std::move(x0));
}

ModelSpec ModelSpec::scaled_brownian(const Matrix& a, std::vector<double> x0) {
  ModelSpec m;
  m.family = Family::scaled_brownian;
  m.dim = a.rows();
  m.a = a;
  m.x0 = default_x0(std::move(x0), m.dim, 0.0);
  m.validate();
  return m;
}

ModelSpec ModelSpec::gaussian_martingale(PiecewiseConstMatrix g, std::vector<double> x0) {
  ModelSpec m;
  m.family = Family::gaussian_martingale;
  m.dim = g.dim();
  m.g = std::move(g);
  m.x0 = default_x0(std::move(x0), m.dim, 0.0);
  m.validate();
  return m;
}

ModelSpec ModelSpec::black_scholes(const Matrix& gamma, std::vector<double> x0) {
  ModelSpec m;
  m.family = Family::black_scholes;
  m.dim = gamma.rows();
  m.gamma = gamma;
  m.x0 = default_x0(std::move(x0), m.dim, 1.0);
  m.validate();
  return m;
}

ModelSpec ModelSpec::delayed_volatility(int delay_n, DelayRule rule, VolRule g,
                                        std::vector<double> x0) {
  ModelSpec m;
  m.family = Family::delayed_volatility;
  m.dim = g.dim();
  m.delay_n = delay_n;
  m.delay_rule = rule;
  m.vol = std::move(g);
  m.x0 = default_x0(std::move(x0), m.dim, 0.0);
  m.validate();
  return m;
}

ModelSpec ModelSpec::sde_martingale(VolRule vol, std::vector<double> x0) {
  ModelSpec m;
  m.family = Family::sde_martingale;
  m.dim = vol.dim();
  m.vol = std::move(vol);
  m.x0 = default_x0(std::move(x0), m.dim, 0.0);
  m.validate();
  return m;
}

ModelSpec ModelSpec::product(std::vector<ModelSpec> components) {
  ModelSpec m;
  m.family = Family::product;
  m.dim = 0;
  for (const auto& c : components) {
    m.dim += c.dim;
    m.x0.insert(m.x0.end(), c.x0.begin(), c.x0.end());
  }
  m.components = std::move(components);
  m.validate();
  return m;
}

void ModelSpec::validate() const {
  if (dim < 1) throw DimensionError("model dimension must be positive");
  if (static_cast<int>(x0.size()) != dim) throw DimensionError("x0 size must equal model dimension");
  for (double v : x0)
    if (!std::isfinite(v)) throw InvalidArgumentError("x0 must be finite");
  switch (family) {
    case Family::scaled_brownian:
      if (a.rows() != dim || a.cols() != dim) throw DimensionError("A must be dim x dim");
      break;
    case Family::gaussian_martingale:
      g.validate();
      if (g.dim() != dim) throw DimensionError("G dimension mismatch");
      break;
    case Family::black_scholes:
      if (gamma.rows() != dim || gamma.cols() != dim) throw DimensionError("Gamma must be dim x dim");
      for (double v : x0)
        if (!(v > 0.0)) throw InvalidArgumentError("Black-Scholes start must be positive");
      break;
    case Family::delayed_volatility:
      if (delay_n < 1) throw InvalidArgumentError("delay N must be >= 1");
      if (vol.dim() != dim) throw DimensionError("volatility rule dimension mismatch");
      if ((delay_rule == DelayRule::value_map || delay_rule == DelayRule::frozen) && !vol.is_pointwise())
        throw InvalidArgumentError("value_map/frozen rules need a pointwise volatility function");
      break;
    case Family::sde_martingale:
      if (vol.dim() != dim) throw DimensionError("volatility rule dimension mismatch");
      break;
    case Family::product: {
      if (components.empty()) throw InvalidArgumentError("product needs at least one component");
      int total = 0;
      for (const auto& c : components) {
        c.validate();
        total += c.dim;
      }
      if (total != dim) throw DimensionError("product dimension mismatch");
      break;
    }
  }
}

bool ModelSpec::is_standard_brownian() const {
  if (family == Family::product) {
    for (const auto& c : components)
      if (!c.is_standard_brownian()) return false;
    return true;
  }
  if (family != Family::scaled_brownian) return false;
  const SpdMatrix gg = SpdMatrix::gram(a);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (std::abs(gg(i, j) - (i == j ? 1.0 : 0.0)) > 1e-12) return false;
  return true;
}

Matrix ModelSpec::volatility(double t, const PathHistory& h) const {
  switch (family) {
    case Family::sde_martingale:
      return vol.eval(t, h);
    case Family::delayed_volatility: {
      switch (delay_rule) {
        case DelayRule::value_map: {
          const double u = std::max(0.0, t - 1.0 / delay_n);
          return vol.eval_at_point(u, h.at_time(u), dim);
        }
        case DelayRule::frozen: {
          const int j = static_cast<int>(std::floor(t * delay_n + 1e-9));
          const double u = std::max(j - 1, 0) / static_cast<double>(delay_n);
          return vol.eval_at_point(u, h.at_time(u), dim);
        }
        case DelayRule::direct:
          return vol.eval(t, h);
      }
      throw std::logic_error("unreachable");
    }
    default:
      throw UnsupportedTransformError("volatility callback only exists for SDE-type families");
  }
}

// ---------------------------------------------------------------------------
// Simulation

PathSimulator::PathSimulator(const ModelSpec& model, int level, int euler_substeps)
    : model_(model), level_(level), substeps_(euler_substeps) {
  if (level < 1) throw InvalidLevelError("level must be >= 1");
  if (euler_substeps < 1) throw InvalidLevelError("euler substeps must be >= 1");
  model.validate();

  switch (model.family) {
    case Family::scaled_brownian:
    case Family::black_scholes:
      scheme_ = Scheme::exact;
      break;
    case Family::gaussian_martingale: {
      scheme_ = Scheme::exact;
      step_factors_.reserve(static_cast<std::size_t>(level));
      for (int k = 1; k <= level; ++k) {
        const SpdMatrix da = model.g.integral((k - 1.0) / level, static_cast<double>(k) / level);
        Matrix lower;
        if (cholesky(da, lower)) {
          step_factors_.push_back(lower);
        } else {
          step_factors_.push_back(spd_sqrt(da).matrix());  // PSD-singular increment
        }
      }
      break;
    }
    case Family::delayed_volatility:
    case Family::sde_martingale:
      scheme_ = Scheme::euler;
      break;
    case Family::product: {
      scheme_ = Scheme::exact;
      for (const auto& c : model.components) {
        children_.emplace_back(std::make_unique<PathSimulator>(c, level, euler_substeps));
        if (children_.back()->scheme() == Scheme::euler) scheme_ = Scheme::euler;
      }
      break;
    }
  }
  if (model.family == Family::black_scholes) {
    const SpdMatrix gg = SpdMatrix::gram(model.gamma);
    bs_row_sq_.resize(static_cast<std::size_t>(model.dim));
    for (int i = 0; i < model.dim; ++i) bs_row_sq_[static_cast<std::size_t>(i)] = gg(i, i);
  }
}

namespace {

std::uint64_t product_block_seed(std::uint64_t seed, std::size_t block) {
  return mix64(seed ^ (0xB10CB10CULL + static_cast<std::uint64_t>(block)));
}

}  // namespace

void PathSimulator::sample(std::uint64_t seed, std::uint64_t path_index, double* out) const {
  if (model_.family == Family::product) {
    const int l = model_.dim;
    std::vector<double> buf;
    int offset = 0;
    for (std::size_t b = 0; b < children_.size(); ++b) {
      const PathSimulator& child = *children_[b];
      buf.assign(static_cast<std::size_t>(level_ + 1) * child.dim(), 0.0);
      child.sample(product_block_seed(seed, b), path_index, buf.data());
      for (int k = 0; k <= level_; ++k)
        for (int i = 0; i < child.dim(); ++i)
          out[static_cast<std::size_t>(k) * l + offset + i] =
              buf[static_cast<std::size_t>(k) * child.dim() + i];
      offset += child.dim();
    }
    return;
  }
  CounterRng rng = CounterRng::substream(seed, path_index);
  sample_with_rng(rng, out);
}

void PathSimulator::sample_with_rng(CounterRng& rng, double* out) const {
  const int l = model_.dim;
  const int n = level_;
  for (int i = 0; i < l; ++i) out[i] = model_.x0[static_cast<std::size_t>(i)];

  std::vector<double> z(static_cast<std::size_t>(l));
  std::vector<double> w(static_cast<std::size_t>(l));

  switch (model_.family) {
    case Family::scaled_brownian: {
      const double root_dt = std::sqrt(1.0 / n);
      for (int k = 1; k <= n; ++k) {
        for (int i = 0; i < l; ++i) z[static_cast<std::size_t>(i)] = rng.next_normal();
        model_.a.apply(z.data(), w.data());
        double* row = out + static_cast<std::size_t>(k) * l;
        const double* prev = out + static_cast<std::size_t>(k - 1) * l;
        for (int i = 0; i < l; ++i) row[i] = prev[i] + root_dt * w[i];
      }
      return;
    }
    case Family::gaussian_martingale: {
      for (int k = 1; k <= n; ++k) {
        for (int i = 0; i < l; ++i) z[static_cast<std::size_t>(i)] = rng.next_normal();
        step_factors_[static_cast<std::size_t>(k - 1)].apply(z.data(), w.data());
        double* row = out + static_cast<std::size_t>(k) * l;
        const double* prev = out + static_cast<std::size_t>(k - 1) * l;
        for (int i = 0; i < l; ++i) row[i] = prev[i] + w[i];
      }
      return;
    }
    case Family::black_scholes: {
      // exact lognormal one-step sampling; no discretization bias
      const double root_dt = std::sqrt(1.0 / n);
      for (int k = 1; k <= n; ++k) {
        for (int i = 0; i < l; ++i) z[static_cast<std::size_t>(i)] = rng.next_normal();
        model_.gamma.apply(z.data(), w.data());
        double* row = out + static_cast<std::size_t>(k) * l;
        const double* prev = out + static_cast<std::size_t>(k - 1) * l;
        for (int i = 0; i < l; ++i)
          row[i] = prev[i] * std::exp(root_dt * w[i] - 0.5 * bs_row_sq_[static_cast<std::size_t>(i)] / n);
      }
      return;
    }
    case Family::delayed_volatility:
    case Family::sde_martingale: {
      std::vector<double> history;
      history.reserve(static_cast<std::size_t>(n * substeps_ + 1) * l);
      history.assign(model_.x0.begin(), model_.x0.end());
      for (int k = 1; k <= n; ++k) {
        euler_advance_interval(model_, n, substeps_, history, rng);
        const double* last = history.data() + history.size() - static_cast<std::size_t>(l);
        double* row = out + static_cast<std::size_t>(k) * l;
        for (int i = 0; i < l; ++i) row[i] = last[i];
      }
      return;
    }
    case Family::product:
      throw std::logic_error("product handled in sample()");
  }
}

void euler_advance_interval(const ModelSpec& model, int level, int substeps,
                            std::vector<double>& history, CounterRng& rng) {
  const int l = model.dim;
  const double dt = 1.0 / (static_cast<double>(level) * substeps);
  const double root_dt = std::sqrt(dt);
  std::vector<double> z(static_cast<std::size_t>(l)), w(static_cast<std::size_t>(l));

  for (int s = 0; s < substeps; ++s) {
    const int rows = static_cast<int>(history.size()) / l;
    const double t = (rows - 1) * dt;
    const PathHistory h{history.data(), rows, l, dt};
    const Matrix sigma = model.volatility(t, h);
    for (int i = 0; i < l; ++i) z[static_cast<std::size_t>(i)] = rng.next_normal();
    sigma.apply(z.data(), w.data());
    const double* cur = h.last();
    for (int i = 0; i < l; ++i) history.push_back(cur[i] + root_dt * w[i]);
  }
}

PathEnsemble simulate(const ModelSpec& model, int level, std::int64_t count,
                      std::uint64_t seed, const SimOptions& opts) {
  if (count < 1) throw InvalidArgumentError("path count must be >= 1");
  const PathSimulator sim(model, level, opts.euler_substeps);

  PathEnsemble ens;
  ens.model = model;
  ens.level = level;
  ens.count = count;
  ens.seed = seed;
  ens.scheme = sim.scheme();
  ens.euler_substeps = sim.scheme() == Scheme::euler ? opts.euler_substeps : 0;
  ens.data.assign(static_cast<std::size_t>(count) * (level + 1) * model.dim, 0.0);

  const std::size_t stride = static_cast<std::size_t>(level + 1) * model.dim;
  parallel_chunks(count, opts.threads, [&](std::int64_t, std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i)
      sim.sample(seed, static_cast<std::uint64_t>(i), ens.data.data() + static_cast<std::size_t>(i) * stride);
  });
  return ens;
}

// ---------------------------------------------------------------------------
// Conditional increment laws

GaussianLaw StepLaw::value_gaussian(const double* y) const {
  if (kind != Kind::gaussian_increment) throw std::logic_error("not a Gaussian step law");
  GaussianLaw law{mean, cov};
  for (std::size_t i = 0; i < law.mean.size(); ++i) law.mean[i] += y[i];
  return law;
}

LognormalLaw StepLaw::value_lognormal(const double* y) const {
  if (kind != Kind::lognormal_ratio) throw std::logic_error("not a lognormal step law");
  LognormalLaw law{mean, cov};
  for (std::size_t i = 0; i < law.log_mean.size(); ++i) {
    if (!(y[i] > 0.0)) throw InvalidArgumentError("lognormal step needs a positive prefix value");
    law.log_mean[i] += std::log(y[i]);
  }
  return law;
}

SpdMatrix StepLaw::increment_covariance(const double* y) const {
  if (kind == Kind::gaussian_increment) return cov;
  const int l = cov.dim();
  // X = y o R with R lognormal(mean, cov):
  //   E[(X - y)(X - y)^T]_ij = y_i y_j (E[R_i R_j] - E[R_i] - E[R_j] + 1)
  // (the mean-shift term vanishes for martingale-normalized ratios)
  std::vector<double> er(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i)
    er[static_cast<std::size_t>(i)] = std::exp(mean[static_cast<std::size_t>(i)] + 0.5 * cov(i, i));
  Matrix c(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = i; j < l; ++j) {
      const double ei = er[static_cast<std::size_t>(i)], ej = er[static_cast<std::size_t>(j)];
      const double second = ei * ej * std::exp(cov(i, j));
      const double v = y[i] * y[j] * (second - ei - ej + 1.0);
      c(i, j) = v;
      c(j, i) = v;
    }
  return SpdMatrix(c);
}

bool has_conditional_law(const ModelSpec& model, int n) {
  switch (model.family) {
    case Family::scaled_brownian:
    case Family::gaussian_martingale:
    case Family::black_scholes:
      return true;
    case Family::delayed_volatility:
      return model.delay_rule == DelayRule::frozen && n % model.delay_n == 0;
    case Family::sde_martingale:
      return false;
    case Family::product:
      for (const auto& c : model.components)
        if (!has_conditional_law(c, n)) return false;
      return true;
  }
  return false;
}

bool conditional_law_is_prefix_free(const ModelSpec& model) {
  switch (model.family) {
    case Family::scaled_brownian:
    case Family::gaussian_martingale:
    case Family::black_scholes:
      return true;
    case Family::product:
      for (const auto& c : model.components)
        if (!conditional_law_is_prefix_free(c)) return false;
      return true;
    default:
      return false;
  }
}

StepLaw conditional_increment_law(const ModelSpec& model, int k, int n, const PrefixView& prefix) {
  if (k < 1 || k > n) throw InvalidLevelError("step index out of range");
  const int l = model.dim;
  StepLaw law;
  switch (model.family) {
    case Family::scaled_brownian:
      law.kind = StepLaw::Kind::gaussian_increment;
      law.mean.assign(static_cast<std::size_t>(l), 0.0);
      law.cov = SpdMatrix::gram(model.a).scaled(1.0 / n);
      return law;
    case Family::gaussian_martingale:
      law.kind = StepLaw::Kind::gaussian_increment;
      law.mean.assign(static_cast<std::size_t>(l), 0.0);
      law.cov = model.g.integral((k - 1.0) / n, static_cast<double>(k) / n);
      return law;
    case Family::black_scholes: {
      // ratio M_k / M_{k-1} ~ lognormal(-(1/2n) diag(GG^T), (1/n) GG^T),
      // independent of the prefix
      const SpdMatrix gg = SpdMatrix::gram(model.gamma);
      law.kind = StepLaw::Kind::lognormal_ratio;
      law.mean.resize(static_cast<std::size_t>(l));
      for (int i = 0; i < l; ++i) law.mean[static_cast<std::size_t>(i)] = -0.5 * gg(i, i) / n;
      law.cov = gg.scaled(1.0 / n);
      return law;
    }
    case Family::delayed_volatility: {
      if (model.delay_rule != DelayRule::frozen)
        throw NoClosedFormError("conditional law requires the frozen-volatility rule");
      if (n % model.delay_n != 0)
        throw IncompatibleLevelsError("grid level must be a multiple of the delay N");
      const int m = n / model.delay_n;          // fine steps per coarse interval
      const int j = (k - 1) / m;                // coarse interval of this step
      const int u_idx = std::max(j - 1, 0) * m; // grid index the volatility was frozen at
      if (prefix.len <= u_idx) throw InvalidArgumentError("prefix too short for frozen rule");
      const double u = static_cast<double>(std::max(j - 1, 0)) / model.delay_n;
      const Matrix sigma = model.vol.eval_at_point(u, prefix.row(u_idx), l);
      law.kind = StepLaw::Kind::gaussian_increment;
      law.mean.assign(static_cast<std::size_t>(l), 0.0);
      law.cov = SpdMatrix::gram(sigma).scaled(1.0 / n);
      return law;
    }
    case Family::sde_martingale:
      throw NoClosedFormError("generic SDE martingales have no closed-form transition");
    case Family::product: {
      // representable only when every block is a Gaussian increment
      law.kind = StepLaw::Kind::gaussian_increment;
      law.mean.assign(static_cast<std::size_t>(l), 0.0);
      Matrix block(l, l);
      int offset = 0;
      std::vector<double> slice;
      for (const auto& c : model.components) {
        slice.assign(static_cast<std::size_t>(prefix.len) * c.dim, 0.0);
        for (int t = 0; t < prefix.len; ++t)
          for (int i = 0; i < c.dim; ++i)
            slice[static_cast<std::size_t>(t) * c.dim + i] = prefix.row(t)[offset + i];
        const PrefixView sub{slice.data(), prefix.len, c.dim};
        const StepLaw sl = conditional_increment_law(c, k, n, sub);
        if (sl.kind != StepLaw::Kind::gaussian_increment)
          throw NoClosedFormError("mixed product transition is not representable as one law");
        for (int i = 0; i < c.dim; ++i)
          for (int jj = 0; jj < c.dim; ++jj) block(offset + i, offset + jj) = sl.cov(i, jj);
        offset += c.dim;
      }
      law.cov = SpdMatrix(block);
      return law;
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Realized quadratic variation

QvDensityTrack realized_qv_density(const double* path, int fine_level, int dim, int window_n) {
  if (window_n < 1 || fine_level % window_n != 0)
    throw IncompatibleLevelsError("fine level must be divisible by the window level");
  if (fine_level / window_n < 4)
    throw IncompatibleLevelsError("need at least 4 fine increments per window");

  const int per = fine_level / window_n;
  QvDensityTrack track;
  track.grid.resize(static_cast<std::size_t>(window_n) + 1);
  for (int j = 0; j <= window_n; ++j) track.grid[static_cast<std::size_t>(j)] = static_cast<double>(j) / window_n;

  std::vector<double> dx(static_cast<std::size_t>(dim));
  for (int j = 0; j < window_n; ++j) {
    SpdMatrix acc = SpdMatrix::zero(dim);
    for (int s = 0; s < per; ++s) {
      const int k = j * per + s;
      const double* cur = path + static_cast<std::size_t>(k + 1) * dim;
      const double* prev = path + static_cast<std::size_t>(k) * dim;
      for (int i = 0; i < dim; ++i) dx[static_cast<std::size_t>(i)] = cur[i] - prev[i];
      acc.add_outer(dx.data(), static_cast<double>(window_n));
    }
    track.values.push_back(acc);
  }
  return track;
}

// ---------------------------------------------------------------------------
// Transforms

ModelSpec transform(const ModelSpec& model, TransformKind kind, double parameter) {
  switch (model.family) {
    case Family::gaussian_martingale: {
      if (kind == TransformKind::inflate || kind == TransformKind::cap) {
        PiecewiseConstMatrix g2 = model.g;
        for (auto& v : g2.values)
          v = spectral_transform(v,
                                 kind == TransformKind::inflate ? SpectralKind::inflate_sqrt
                                                                : SpectralKind::cap,
                                 parameter);
        return ModelSpec::gaussian_martingale(std::move(g2), model.x0);
      }
      throw UnsupportedTransformError("only inflate/cap act on Gaussian martingales");
    }
    case Family::sde_martingale:
    case Family::delayed_volatility: {
      // Full model volatility (delay semantics included) as the base rule.
      VolRule base;
      if (model.family == Family::sde_martingale) {
        base = model.vol;
      } else {
        const ModelSpec inner_model = model;
        base = VolRule::custom(
            [inner_model](double t, const PathHistory& h) { return inner_model.volatility(t, h); },
            model.dim);
      }

      VolRule wrapped;
      switch (kind) {
        case TransformKind::inflate:
          wrapped = VolRule::wrap_inflate(std::move(base), parameter);
          break;
        case TransformKind::cap:
          wrapped = VolRule::wrap_cap(std::move(base), parameter);
          break;
        case TransformKind::mollify: {
          const int n = static_cast<int>(parameter);
          if (n < 1 || parameter != n) throw InvalidArgumentError("mollify needs a positive integer n");
          wrapped = VolRule::wrap_mollify(std::move(base), n);
          break;
        }
        case TransformKind::delay: {
          const int d = static_cast<int>(parameter);
          if (d < 1 || parameter != d) throw InvalidArgumentError("delay needs a positive integer N");
          // sigma'_t = sigma_{t-1/N} is F_{(t-1/N) v 0}-measurable by construction
          return ModelSpec::delayed_volatility(d, DelayRule::direct,
                                               VolRule::wrap_shift(std::move(base), d), model.x0);
        }
      }
      // inflate/cap/mollify preserve the delayed measurability (they only
      // use sigma at times <= t), so the class parameter N carries over.
      if (model.family == Family::delayed_volatility)
        return ModelSpec::delayed_volatility(model.delay_n, DelayRule::direct, std::move(wrapped),
                                             model.x0);
      return ModelSpec::sde_martingale(std::move(wrapped), model.x0);
    }
    default:
      throw UnsupportedTransformError("transform has no defined action on closed-form family " +
                                      family_name(model.family));
  }
}

}  // namespace srel
