#include "srel/spdlinalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace srel {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const std::vector<double>& d) {
  Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (int i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DimensionError("matrix needs at least one row");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows(); ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != m.cols())
      throw DimensionError("ragged rows in matrix literal");
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw DimensionError("matrix product shape mismatch");
  Matrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
    }
  return r;
}

Matrix Matrix::operator+(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix sum shape mismatch");
  Matrix r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j) + o(i, j);
  return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix difference shape mismatch");
  Matrix r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j) - o(i, j);
  return r;
}

Matrix Matrix::scaled(double c) const {
  Matrix r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(i, j) = c * (*this)(i, j);
  return r;
}

std::vector<double> Matrix::apply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != cols_) throw DimensionError("matrix-vector shape mismatch");
  std::vector<double> out(static_cast<std::size_t>(rows_));
  apply(x.data(), out.data());
  return out;
}

void Matrix::apply(const double* x, double* out) const {
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    out[i] = s;
  }
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double s = 0.0;
  for (double v : a_) s = std::max(s, std::abs(v));
  return s;
}

SpdMatrix::SpdMatrix(const Matrix& a) : dim_(a.rows()), m_(a.rows(), a.cols()) {
  if (a.rows() != a.cols()) throw DimensionError("SpdMatrix requires a square matrix");
  double asym = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
      m_(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
  asymmetry_ = asym;
  const double scale = 1.0 + a.max_abs();
  if (asym > 1e-8 * scale)
    throw InvalidArgumentError("matrix is not symmetric (relative asymmetry above 1e-8)");
}

SpdMatrix SpdMatrix::identity(int n) { return SpdMatrix(Matrix::identity(n)); }

SpdMatrix SpdMatrix::diagonal(const std::vector<double>& d) { return SpdMatrix(Matrix::diagonal(d)); }

SpdMatrix SpdMatrix::zero(int n) { return SpdMatrix(Matrix(n, n)); }

SpdMatrix SpdMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  return SpdMatrix(Matrix::from_rows(rows));
}

SpdMatrix SpdMatrix::gram(const Matrix& a) {
  Matrix g(a.rows(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i; j < a.rows(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * a(j, k);
      g(i, j) = s;
      g(j, i) = s;
    }
  return SpdMatrix(g);
}

SpdMatrix SpdMatrix::operator+(const SpdMatrix& o) const { return SpdMatrix(m_ + o.m_); }

SpdMatrix SpdMatrix::scaled(double c) const { return SpdMatrix(m_.scaled(c)); }

void SpdMatrix::add_outer(const double* x, double weight) {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m_(i, j) += weight * x[i] * x[j];
}

double SpdMatrix::trace() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += m_(i, i);
  return s;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

Eigensystem eigen_decompose(const SpdMatrix& sigma) {
  const int n = sigma.dim();
  Matrix a = sigma.matrix();
  Matrix v = Matrix::identity(n);

  const double scale = std::max(a.frobenius_norm(), 1e-300);
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-14 * scale) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

  Eigensystem es;
  es.eigenvalues.resize(static_cast<std::size_t>(n));
  es.eigenvectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    es.eigenvalues[static_cast<std::size_t>(j)] = a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i) es.eigenvectors(i, j) = v(i, order[static_cast<std::size_t>(j)]);
  }
  return es;
}

bool cholesky(const SpdMatrix& sigma, Matrix& lower) {
  const int n = sigma.dim();
  lower = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    double d = sigma(j, j);
    for (int k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = sigma(i, j);
      for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return true;
}

namespace {

void require_spd(const std::vector<double>& eigenvalues) {
  const double top = eigenvalues.empty() ? 0.0 : eigenvalues.front();
  if (!(top > 0.0) || eigenvalues.back() <= kEpsSpd * top)
    throw SingularMatrixError("matrix is singular or indefinite (min eigenvalue below eps_spd)");
}

}  // namespace

double log_det_spd(const SpdMatrix& sigma) {
  const Eigensystem es = eigen_decompose(sigma);
  require_spd(es.eigenvalues);
  Matrix lower;
  if (cholesky(sigma, lower)) {
    double ld = 0.0;
    for (int i = 0; i < sigma.dim(); ++i) ld += std::log(lower(i, i));
    return 2.0 * ld;
  }
  double ld = 0.0;
  for (double ev : es.eigenvalues) ld += std::log(ev);
  return ld;
}

double f_1(double x) {
  if (!(x > 0.0)) throw SingularMatrixError("F_1 needs a positive argument");
  return 0.5 * (x - 1.0 - std::log(x));
}

double f_l(const SpdMatrix& sigma) {
  const double v = 0.5 * (sigma.trace() - sigma.dim() - log_det_spd(sigma));
  // tr - l - log det is >= 0 analytically; allow rounding at the minimum
  if (v < 0.0) {
    if (v < -1e-9 * (1.0 + std::abs(sigma.trace())))
      throw std::logic_error("F_l produced a significantly negative value");
    return 0.0;
  }
  return v;
}

double f_l_pair(const SpdMatrix& sigma1, const SpdMatrix& sigma2) {
  if (sigma1.dim() != sigma2.dim()) throw DimensionError("F(S2^-1 S1): dimension mismatch");
  // Shortcut for sigma2 == c*I keeps aligned-grid values exact.
  bool scalar2 = true;
  const double c = sigma2(0, 0);
  for (int i = 0; i < sigma2.dim() && scalar2; ++i)
    for (int j = 0; j < sigma2.dim(); ++j)
      if (sigma2(i, j) != (i == j ? c : 0.0)) {
        scalar2 = false;
        break;
      }
  if (scalar2) {
    if (!(c > 0.0)) throw SingularMatrixError("singular reference covariance");
    return f_l(sigma1.scaled(1.0 / c));
  }

  const SpdMatrix r = spd_inv_sqrt(sigma2);
  const Matrix sandwich = r.matrix() * sigma1.matrix() * r.matrix();
  return f_l(SpdMatrix(sandwich));
}

namespace {

SpdMatrix rebuild(const Eigensystem& es, const std::vector<double>& eigenvalues) {
  Matrix d = Matrix::diagonal(eigenvalues);
  Matrix m = es.eigenvectors * d * es.eigenvectors.transpose();
  return SpdMatrix(m);
}

}  // namespace

SpdMatrix spd_sqrt(const SpdMatrix& sigma) {
  Eigensystem es = eigen_decompose(sigma);
  std::vector<double> r(es.eigenvalues.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(std::max(es.eigenvalues[i], 0.0));
  return rebuild(es, r);
}

SpdMatrix spd_inv_sqrt(const SpdMatrix& sigma) {
  Eigensystem es = eigen_decompose(sigma);
  require_spd(es.eigenvalues);
  std::vector<double> r(es.eigenvalues.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 1.0 / std::sqrt(es.eigenvalues[i]);
  return rebuild(es, r);
}

SpdMatrix spectral_transform(const SpdMatrix& sigma, SpectralKind kind, double parameter) {
  if (kind == SpectralKind::inflate_sqrt) {
    SpdMatrix root = spd_sqrt(sigma);
    Matrix shifted = root.matrix();
    for (int i = 0; i < shifted.rows(); ++i) shifted(i, i) += parameter;
    return SpdMatrix(shifted * shifted);
  }
  Eigensystem es = eigen_decompose(sigma);
  std::vector<double> r(es.eigenvalues.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ev = std::max(es.eigenvalues[i], 0.0);
    r[i] = kind == SpectralKind::cap ? std::min(ev, parameter) : std::max(ev, parameter);
  }
  return rebuild(es, r);
}

}  // namespace srel
