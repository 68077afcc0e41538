#ifndef SREL_SPDLINALG_HPP
#define SREL_SPDLINALG_HPP

#include <cstddef>
#include <vector>

#include "srel/errors.hpp"

namespace srel {

// Below eps_spd (relative to the largest eigenvalue) a matrix is treated as
// singular: log det is divergent rather than a huge finite number.
inline constexpr double kEpsSpd = 1e-12;

// Small dense row-major matrix. Dimensions here are the spatial dimension l
// of the martingale (typically 1-8); nothing is tuned for large l.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static Matrix identity(int n);
  static Matrix diagonal(const std::vector<double>& d);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  Matrix transpose() const;
  Matrix operator*(const Matrix& o) const;
  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix scaled(double c) const;

  std::vector<double> apply(const std::vector<double>& x) const;
  void apply(const double* x, double* out) const;

  double frobenius_norm() const;
  double max_abs() const;
  bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

  const std::vector<double>& data() const { return a_; }

 private:
  int rows_, cols_;
  std::vector<double> a_;
};

// Symmetric positive (semi)definite matrix. Construction symmetrizes via
// (A+A^T)/2 and rejects inputs whose relative asymmetry exceeds 1e-8 --
// asymmetric callers are bugs, not noise. Positivity is checked by the
// operations that need it, against kEpsSpd relative to the top eigenvalue.
class SpdMatrix {
 public:
  SpdMatrix() : dim_(0) {}
  explicit SpdMatrix(const Matrix& a);

  static SpdMatrix identity(int n);
  static SpdMatrix diagonal(const std::vector<double>& d);
  static SpdMatrix zero(int n);
  static SpdMatrix from_rows(const std::vector<std::vector<double>>& rows);
  // A * A^T, symmetric by construction.
  static SpdMatrix gram(const Matrix& a);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }
  double asymmetry() const { return asymmetry_; }

  SpdMatrix operator+(const SpdMatrix& o) const;
  SpdMatrix scaled(double c) const;
  // Rank-one update accumulator used by realized-covariance sums.
  void add_outer(const double* x, double weight);

  double trace() const;
  double frobenius_norm() const { return m_.frobenius_norm(); }
  bool operator==(const SpdMatrix& o) const { return m_ == o.m_; }

 private:
  int dim_;
  Matrix m_;
  double asymmetry_ = 0.0;
};

struct Eigensystem {
  std::vector<double> eigenvalues;  // nonincreasing
  Matrix eigenvectors;              // columns, orthogonal
};

// Cyclic Jacobi iteration; exact enough for l <= 8 without an external solver.
Eigensystem eigen_decompose(const SpdMatrix& sigma);

// Lower-triangular Cholesky factor. Returns false (without throwing) when a
// pivot is not safely positive, so callers can fall back to eigenvalues.
bool cholesky(const SpdMatrix& sigma, Matrix& lower);

// log det via Cholesky when well-conditioned, eigenvalue sum otherwise.
// Throws SingularMatrixError when the matrix fails the kEpsSpd check.
double log_det_spd(const SpdMatrix& sigma);

// F(Sigma) = (tr(Sigma) - l - log det Sigma) / 2. Zero exactly at the
// identity; the Gaussian relative entropy with matched means.
double f_l(const SpdMatrix& sigma);
double f_1(double x);

// F of the symmetric sandwich Sigma2^{-1/2} Sigma1 Sigma2^{-1/2}.
double f_l_pair(const SpdMatrix& sigma1, const SpdMatrix& sigma2);

// Unique symmetric PSD square root.
SpdMatrix spd_sqrt(const SpdMatrix& sigma);
// Sigma2^{-1/2}; throws SingularMatrixError on singular input.
SpdMatrix spd_inv_sqrt(const SpdMatrix& sigma);

enum class SpectralKind {
  cap,           // eigenvalues min(lambda, c)
  inflate_sqrt,  // (Sigma^{1/2} + eps I)^2
  floor,         // eigenvalues max(lambda, eps)
};

SpdMatrix spectral_transform(const SpdMatrix& sigma, SpectralKind kind, double parameter);

}  // namespace srel

#endif
