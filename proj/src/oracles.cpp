#include "srel/oracles.hpp"

#include <cmath>

namespace srel {

OracleValue h_scaled_bm(double sigma, double eta, int l) {
  if (!(sigma > 0.0) || !(eta > 0.0))
    throw InvalidArgumentError("scaled Brownian factors must be positive");
  if (l < 1) throw DimensionError("dimension must be positive");
  const double r = (sigma * sigma) / (eta * eta);
  return OracleValue{ExtReal::finite(0.5 * l * (r - 1.0 - std::log(r))), "scaledBm"};
}

OracleValue h_gaussian_martingale(const PiecewiseConstMatrix& g) {
  g.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double len = g.breakpoints[i + 1] - g.breakpoints[i];
    try {
      sum += len * f_l(g.values[i]);
    } catch (const SingularMatrixError&) {
      return OracleValue{ExtReal::infinity(), "gaussianMartingale"};
    }
  }
  return OracleValue{ExtReal::finite(sum), "gaussianMartingale"};
}

OracleValue h_gbm_vs_bm(const Matrix& gamma) {
  const int l = gamma.rows();
  const SpdMatrix gg = SpdMatrix::gram(gamma);
  const double log_det = log_det_spd(gg);  // SingularMatrixError on degenerate volatility
  double v = -0.5 * l - 0.5 * log_det + 0.25 * gg.trace();
  for (int i = 0; i < l; ++i) v += 0.5 * std::expm1(gg(i, i));
  return OracleValue{ExtReal::finite(v), "gbmVsBm"};
}

OracleValue h_gbm_vs_gbm(const Matrix& gamma1, const Matrix& gamma2) {
  if (gamma1.rows() != gamma2.rows()) throw DimensionError("volatility dimensions differ");
  const SpdMatrix g1 = SpdMatrix::gram(gamma1);
  const SpdMatrix g2 = SpdMatrix::gram(gamma2);
  log_det_spd(g1);  // both must be nonsingular
  return OracleValue{ExtReal::finite(f_l_pair(g1, g2)), "gbmVsGbm"};
}

OracleValue tensor_h(const std::vector<OracleValue>& components, TensorMode mode, int l) {
  if (components.empty()) throw InvalidArgumentError("tensor_h needs at least one component");
  if (mode == TensorMode::iid_product) {
    if (components.size() != 1)
      throw InvalidArgumentError("iid_product takes a single component value");
    if (l < 1) throw InvalidArgumentError("iid_product needs the copy count l");
    const OracleValue& c = components.front();
    OracleValue out;
    out.value = c.value.is_infinite() ? ExtReal::infinity()
                                      : ExtReal::finite(l * c.value.finite_value());
    out.formula_id = "tensorIid(" + c.formula_id + ")";
    out.lower_bound_only = c.lower_bound_only;
    return out;
  }
  OracleValue out;
  out.value = ExtReal::finite(0.0);
  out.formula_id = "tensorSum";
  out.lower_bound_only = true;
  for (const auto& c : components) out.value += c.value;
  return out;
}

}  // namespace srel
