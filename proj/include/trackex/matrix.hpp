#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trackex/projection.hpp"
#include "trackex/simplex.hpp"

namespace trackex {

// ── Dense square matrix ─────────────────────────────────────────────

/// Row-major dense n x n matrix. Only what the spectral routines need.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
  Matrix(std::size_t n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
    if (a_.size() != n_ * n_) throw dimension_error("Matrix: data size is not n*n");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<const double> data() const noexcept { return a_; }

  Matrix transpose() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
    return s;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double x : a_) s += x * x;
    return std::sqrt(s);
  }

  double max_asymmetry() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : a_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    a.check_same(b);
    const std::size_t n = a.n_;
    Matrix c(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same(const Matrix& o) const {
    if (o.n_ != n_) throw dimension_error("Matrix: dimension mismatch");
  }

  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// tr(A B) for square A, B.
inline double trace_product(const Matrix& a, const Matrix& b) {
  if (a.size() != b.size()) throw dimension_error("trace_product: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) s += a(i, j) * b(j, i);
  return s;
}

inline double quadratic_form(const Matrix& a, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) s += v[i] * a(i, j) * v[j];
  return s;
}

// ── Symmetric matrix ────────────────────────────────────────────────

inline constexpr double kSymmetryTolerance = 1e-12;

/// A real symmetric matrix. Construction checks symmetry to 1e-12 and
/// then mirrors the upper triangle so the stored entries are exactly symmetric.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  explicit SymmetricMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.max_asymmetry() > kSymmetryTolerance)
      throw std::invalid_argument("SymmetricMatrix: asymmetry " + std::to_string(m_.max_asymmetry()));
    for (std::size_t i = 0; i < m_.size(); ++i)
      for (std::size_t j = i + 1; j < m_.size(); ++j) m_(j, i) = m_(i, j);
  }

  SymmetricMatrix(std::size_t n, std::vector<double> row_major)
      : SymmetricMatrix(Matrix(n, std::move(row_major))) {}

  static SymmetricMatrix identity(std::size_t n) { return SymmetricMatrix(Matrix::identity(n)); }
  static SymmetricMatrix diagonal(std::span<const double> d) { return SymmetricMatrix(Matrix::diagonal(d)); }

  /// Symmetrizes (A + A^T)/2 without a tolerance check; for products that are
  /// symmetric in exact arithmetic.
  static SymmetricMatrix symmetrize(const Matrix& a) {
    Matrix s(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return SymmetricMatrix(std::move(s));
  }

  std::size_t size() const noexcept { return m_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

  friend SymmetricMatrix operator+(const SymmetricMatrix& a, const SymmetricMatrix& b) {
    return SymmetricMatrix(a.m_ + b.m_);
  }
  friend SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
    return SymmetricMatrix(a.m_ - b.m_);
  }
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a) { return SymmetricMatrix(s * a.m_); }

 private:
  Matrix m_;
};

// ── Eigendecomposition (cyclic Jacobi) ──────────────────────────────

/// A = V diag(values) V^T with V's columns the eigenvectors, values sorted
/// descending, and each eigenvector's first component above 1e-12 in
/// magnitude made positive.
struct EigenDecomposition {
  Matrix vectors;
  std::vector<double> values;

  std::vector<double> column(std::size_t j) const {
    std::vector<double> v(vectors.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = vectors(i, j);
    return v;
  }
  double min_value() const { return values.back(); }
  double max_value() const { return values.front(); }
};

inline constexpr int kJacobiSweepCap = 100;

inline EigenDecomposition sym_eig(const SymmetricMatrix& input, double tolerance = 1e-10) {
  const std::size_t n = input.size();
  Matrix a = input.matrix();
  Matrix v = Matrix::identity(n);

  const double scale = std::max(1.0, a.frobenius_norm());
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  bool converged = false;
  for (int sweep = 0; sweep < kJacobiSweepCap; ++sweep) {
    const double off = off_norm();
    if (off == 0.0 || off <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_norm() > tolerance * scale)
    throw convergence_error("sym_eig: Jacobi did not converge within the sweep cap");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  EigenDecomposition out{Matrix(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a(src, src);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v(i, src)) > 1e-12) {
        sign = v(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = sign * v(i, src);
  }
  return out;
}

/// V diag(d) V^T, built from the upper triangle and mirrored.
inline SymmetricMatrix compose_spectral(const Matrix& vectors, std::span<const double> d) {
  const std::size_t n = vectors.size();
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += vectors(i, k) * d[k] * vectors(j, k);
      m(i, j) = s;
      m(j, i) = s;
    }
  return SymmetricMatrix(std::move(m));
}

template <typename F>
SymmetricMatrix spectral_apply(const EigenDecomposition& eig, F&& f) {
  std::vector<double> d(eig.values.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = f(eig.values[i]);
  return compose_spectral(eig.vectors, d);
}

inline double spectral_norm(const SymmetricMatrix& a) {
  const auto eig = sym_eig(a);
  return std::max(std::abs(eig.max_value()), std::abs(eig.min_value()));
}

// ── Loss matrices and spectraplex points ────────────────────────────

inline constexpr double kSpectralTolerance = 1e-10;

/// Symmetric loss matrix with spectral norm at most 1 (+1e-10).
class LossMatrix {
 public:
  LossMatrix() = default;
  explicit LossMatrix(SymmetricMatrix z) : z_(std::move(z)), eig_(sym_eig(z_)) {
    const double norm = std::max(std::abs(eig_.max_value()), std::abs(eig_.min_value()));
    if (norm > 1.0 + kSpectralTolerance)
      throw std::invalid_argument("LossMatrix: spectral norm " + std::to_string(norm) + " exceeds 1");
  }

  static LossMatrix zeros(std::size_t k) { return LossMatrix(SymmetricMatrix(Matrix(k))); }
  static LossMatrix diagonal(const LossVector& l) { return LossMatrix(SymmetricMatrix::diagonal(l.losses())); }

  std::size_t size() const noexcept { return z_.size(); }
  const SymmetricMatrix& matrix() const noexcept { return z_; }
  const EigenDecomposition& eig() const noexcept { return eig_; }

 private:
  SymmetricMatrix z_;
  EigenDecomposition eig_;
};

/// Unit-trace PSD matrix with its eigendecomposition cached.
class SpectraplexPoint {
 public:
  SpectraplexPoint() = default;

  explicit SpectraplexPoint(SymmetricMatrix w) : w_(std::move(w)), eig_(sym_eig(w_)) { validate(); }

  SpectraplexPoint(Matrix vectors, std::vector<double> values)
      : w_(compose_spectral(vectors, values)), eig_{std::move(vectors), std::move(values)} {
    validate();
  }

  static SpectraplexPoint uniform(std::size_t k) {
    return SpectraplexPoint(Matrix::identity(k), std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  std::size_t size() const noexcept { return w_.size(); }
  const SymmetricMatrix& matrix() const noexcept { return w_; }
  const EigenDecomposition& eig() const noexcept { return eig_; }
  double min_eigenvalue() const { return eig_.min_value(); }

  bool in_clipped_spectraplex(double clip_floor, double tol = 1e-9) const {
    return eig_.min_value() >= clip_floor - tol && std::abs(w_.matrix().trace() - 1.0) <= tol;
  }

 private:
  void validate() const {
    if (eig_.min_value() < -kSpectralTolerance)
      throw std::invalid_argument("SpectraplexPoint: not positive semidefinite");
    if (std::abs(w_.matrix().trace() - 1.0) > kSpectralTolerance)
      throw std::invalid_argument("SpectraplexPoint: trace is not 1");
  }

  SymmetricMatrix w_;
  EigenDecomposition eig_;
};

// ── Spectral functions ──────────────────────────────────────────────

inline SymmetricMatrix matrix_log(const SpectraplexPoint& w) {
  if (!(w.min_eigenvalue() > 0.0)) throw std::domain_error("matrix_log: eigenvalue <= 0");
  return spectral_apply(w.eig(), [](double x) { return std::log(x); });
}

/// Spectral logarithm of a positive-definite symmetric matrix.
inline SymmetricMatrix matrix_log_general(const SymmetricMatrix& a) {
  const auto eig = sym_eig(a);
  if (!(eig.min_value() > 0.0)) throw std::domain_error("matrix_log_general: matrix is not positive definite");
  return spectral_apply(eig, [](double x) { return std::log(x); });
}

inline SymmetricMatrix matrix_exp(const SymmetricMatrix& a) {
  return spectral_apply(sym_eig(a), [](double x) { return std::exp(x); });
}

inline double von_neumann_entropy(const SpectraplexPoint& w) {
  double s = 0.0;
  for (double x : w.eig().values)
    if (x > 0.0) s += x * std::log(x);
  return s;
}

/// psi(A) - psi(B) - tr((A - B)(I + log B)); requires B positive definite.
inline double von_neumann_divergence(const SpectraplexPoint& a, const SpectraplexPoint& b) {
  if (a.size() != b.size()) throw dimension_error("von_neumann_divergence: dimension mismatch");
  if (!(b.min_eigenvalue() > 0.0)) throw std::domain_error("von_neumann_divergence: B is singular");
  const SymmetricMatrix grad =
      SymmetricMatrix::identity(b.size()) + matrix_log(b);
  const Matrix diff = a.matrix().matrix() - b.matrix().matrix();
  return von_neumann_entropy(a) - von_neumann_entropy(b) - trace_product(diff, grad.matrix());
}

// ── Clipped spectraplex projection ──────────────────────────────────

namespace detail {

// Projects exp(M) given M's eigendecomposition: the eigenbasis is kept and
// the exponentiated spectrum (shifted by its maximum) is water-filled.
inline SpectraplexPoint project_log_spectrum(const EigenDecomposition& log_eig, double clip_floor) {
  const double shift = log_eig.max_value();
  std::vector<double> p(log_eig.values.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_eig.values[i] - shift);
  auto projected = water_fill(p, clip_floor).point;
  return SpectraplexPoint(log_eig.vectors, projected.vec());
}

}  // namespace detail

/// Von Neumann projection of a positive-definite matrix onto
/// {W PSD, tr W = 1, lambda_min(W) >= floor}: same eigenvectors, spectrum
/// projected like a vector.
inline SpectraplexPoint vn_project_clipped(const SymmetricMatrix& p, double clip_floor) {
  const auto eig = sym_eig(p);
  if (!(eig.min_value() > 0.0)) throw std::domain_error("vn_project_clipped: input is not positive definite");
  detail::check_floor(clip_floor, p.size());
  auto projected = detail::water_fill(eig.values, clip_floor).point;
  return SpectraplexPoint(eig.vectors, projected.vec());
}

}  // namespace trackex
