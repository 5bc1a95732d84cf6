#pragma once

// Small dense linear algebra: a row-major matrix, weighted least squares by
// pivoted Householder QR, sandwich products and pseudo-inverse quadratic forms.
// Sized for design matrices of a few thousand rows and a few dozen columns.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace splitplot {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  const std::vector<double>& entries() const noexcept { return data_; }

  Matrix transpose() const;
  /// Sub-block of rows [r0, r0+nr) and columns [c0, c0+nc).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> v);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix hadamard(const Matrix& a, const Matrix& b);
/// (A + Aᵀ)/2.
Matrix symmetrize(const Matrix& a);
Matrix outer(std::span<const double> u, std::span<const double> v);
double dot(std::span<const double> u, std::span<const double> v);

double max_abs(const Matrix& a);
double max_abs(std::span<const double> v);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(std::span<const double> u, std::span<const double> v);

struct LsSolution {
  Vector coefficients;  // 0 for dropped columns
  Vector residuals;     // y - Xβ, unweighted
  std::size_t rank = 0;
  std::vector<std::size_t> dropped_columns;  // ascending
  /// (XᵀWX)⁻¹ over the retained columns, zero rows/cols for dropped ones.
  Matrix gram_inverse;
  /// Retained columns in pivot order; √W X[:, order] = Q R.
  std::vector<std::size_t> order;
  Matrix q;          // n × rank, orthonormal columns
  Matrix r_inverse;  // rank × rank, upper triangular
};

/// Minimizes Σ wᵢ (yᵢ − xᵢᵀβ)² by column-pivoted Householder QR on √w·X.
/// Columns whose pivot falls below 1e-10 × the largest pivot are dropped.
/// The first `priority_cols` columns are pivoted before any other column, so a
/// collinear later column is dropped in preference to one of them.
LsSolution wls_solve(const Matrix& x, std::span<const double> y, std::span<const double> w,
                     std::size_t priority_cols = 0);

/// bread_inv · meat · bread_inv, symmetrized.
Matrix sandwich(const Matrix& bread_inv, const Matrix& meat);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& m);

/// vᵀ M⁺ v with M⁺ the eigen pseudo-inverse; eigenvalues below
/// 1e-12 × the largest are treated as zero.
double quadform_geninv(const Matrix& m, std::span<const double> v);

/// M^{-1/2} for symmetric PSD M, zeroing eigenvalues below rel_tol × the largest.
Matrix psd_inverse_sqrt(const Matrix& m, double rel_tol = 1e-12);

}  // namespace splitplot
