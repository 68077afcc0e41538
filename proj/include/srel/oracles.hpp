#ifndef SREL_ORACLES_HPP
#define SREL_ORACLES_HPP

#include <string>
#include <vector>

#include "srel/ext_real.hpp"
#include "srel/models.hpp"
#include "srel/spdlinalg.hpp"

namespace srel {

// A closed-form specific-relative-entropy value with its provenance, used
// as ground truth across the test surface.
struct OracleValue {
  ExtReal value;
  std::string formula_id;
  bool lower_bound_only = false;  // tensor sums bound, they do not identify
};

// Two scaled Brownian motions sigma B vs eta B in dimension l:
// (l/2)(sigma^2/eta^2 - 1 - log(sigma^2/eta^2)).
OracleValue h_scaled_bm(double sigma, double eta, int l);

// Gaussian martingale with piecewise-constant instantaneous covariance G
// against standard Brownian motion: sum of duration * F(G_piece); Infinite
// as soon as one piece is singular.
OracleValue h_gaussian_martingale(const PiecewiseConstMatrix& g);

// Martingale Black-Scholes model against Brownian motion, both started at
// the all-ones vector.
OracleValue h_gbm_vs_bm(const Matrix& gamma);

// Two martingale Black-Scholes models with a common start.
OracleValue h_gbm_vs_gbm(const Matrix& gamma1, const Matrix& gamma2);

enum class TensorMode { iid_product, sum };

// iid_product: l identical independent coordinates multiply the value
// (an equality); sum: coordinatewise sum, which is only a lower bound
// when the reference has independent coordinates.
OracleValue tensor_h(const std::vector<OracleValue>& components, TensorMode mode, int l = 0);

}  // namespace srel

#endif
